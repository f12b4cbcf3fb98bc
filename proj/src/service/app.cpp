#include "storybuddy/service/app.hpp"

#include "storybuddy/error.hpp"

#include <algorithm>
#include <charconv>

namespace storybuddy::service {

using nlohmann::json;

ApiResponse error_response(int status, std::string code, std::string detail) {
    ApiResponse r;
    r.status = status;
    r.body = {{"error", std::move(code)}, {"detail", std::move(detail)}};
    return r;
}

namespace {

ApiResponse ok(json body) {
    ApiResponse r;
    r.body = std::move(body);
    return r;
}

// Maps engine exceptions onto HTTP statuses.
template <class F>
ApiResponse guarded(F&& f) {
    try {
        return f();
    } catch (const FormatError& e) {
        return error_response(400, "invalid_request", e.what());
    } catch (const SchemaError& e) {
        return error_response(400, "invalid_request", e.what());
    } catch (const ValidationError& e) {
        return error_response(422, "validation_failed", e.what());
    } catch (const ProtocolError& e) {
        return error_response(409, "protocol_error", e.what());
    } catch (const CorruptionError& e) {
        return error_response(500, "corrupt_transcript", e.what());
    } catch (const RemoteError& e) {
        return error_response(502, "remote_failure", e.what());
    } catch (const json::exception& e) {
        return error_response(400, "invalid_request", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal", e.what());
    }
}

ApiResponse story_not_found(const std::string& id) {
    return error_response(404, "story_not_found", "no storybook with id '" + id + "'");
}

ApiResponse session_not_found(const std::string& id) {
    return error_response(404, "session_not_found", "no session with id '" + id + "'");
}

std::optional<std::string> string_field(const json& body, const char* key) {
    const auto it = body.find(key);
    if (it == body.end()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(key);
    return it->get<std::string>();
}

std::string required_string(const json& body, const char* key) {
    auto v = string_field(body, key);
    if (!v) throw SchemaError(key);
    return *v;
}

bool ends_with_question_mark(std::string_view text) {
    while (!text.empty() && (text.back() == ' ' || text.back() == '\n' || text.back() == '\t')) text.remove_suffix(1);
    return !text.empty() && text.back() == '?';
}

std::optional<int> parse_int(const std::string& text) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

json transition_json(const Session& session, const std::vector<Transition>& steps) {
    json utterances = json::array();
    json events = json::array();
    std::optional<Verdict> verdict;
    std::optional<QAPair> followup;
    for (const auto& t : steps) {
        for (const auto& u : t.utterances) utterances.push_back(u);
        for (const auto& e : t.events) events.push_back(event_to_json(e));
        if (t.verdict) verdict = t.verdict;
        if (t.followup) followup = t.followup;
    }
    json options = json::array();
    for (auto o : session.state().offered) options.push_back(to_string(o));
    json doc = {{"session_id", session.state().session_id},
                {"utterances", utterances},
                {"options", options},
                {"events", events},
                {"state", session_state_to_json(session.state())}};
    doc["verdict"] = verdict ? json(to_string(*verdict)) : json(nullptr);
    if (followup) doc["followup"] = qa_pair_to_json(*followup);
    return doc;
}

json session_summary(const Session& s) {
    const auto& st = s.state();
    return {{"session_id", st.session_id},
            {"storybook_id", st.storybook_id},
            {"mode", to_string(st.mode)},
            {"started_at", format_rfc3339(st.started_at)},
            {"phase", to_string(st.phase)},
            {"event_count", s.transcript().events.size()}};
}

}  // namespace

StoryBuddyService::StoryBuddyService(ServiceOptions options, Entropy entropy)
    : options_(std::move(options)),
      lexicons_(Lexicons::load(options_.lexicon_dir)),
      matcher_(std::make_shared<AnswerMatcher>(lexicons_)),
      library_(Library::load(options_.library_dir)),
      store_(options_.data_dir),
      entropy_(std::move(entropy)) {
    if (const auto doc = store_.load_config()) config_ = preferences_from_json(*doc);

    std::vector<std::string> problems;
    for (const auto& doc : store_.load_transcripts(&problems)) {
        try {
            Session session = Session::resume(transcript_from_json(doc), matcher_);
            const std::string id = session.state().session_id;
            sessions_.emplace(id, std::make_shared<SessionSlot>(std::move(session)));
        } catch (const std::exception& e) {
            problems.push_back(doc.value("session_id", std::string("<unknown>")) + ": " + e.what());
        }
    }
    load_problems_ = std::move(problems);
    write_index();
}

// --- library ---------------------------------------------------------------

ApiResponse StoryBuddyService::list_stories() const {
    json stories = json::array();
    for (const auto& e : library_.index()) {
        stories.push_back({{"storybook_id", e.storybook_id},
                           {"title", e.title},
                           {"page_count", e.page_count},
                           {"cover", e.cover ? json(*e.cover) : json(nullptr)}});
    }
    return ok({{"stories", stories}});
}

ApiResponse StoryBuddyService::get_story(const std::string& id) const {
    const Storybook* book = library_.find(id);
    if (book == nullptr) return story_not_found(id);
    ApiResponse r;
    r.raw = serialize_storybook(*book);
    return r;
}

// --- questions -------------------------------------------------------------

const std::vector<StoryBuddyService::GeneratedPage>& StoryBuddyService::generated(const Storybook& book,
                                                                                   const TypeSet& types) {
    const auto key = std::make_pair(book.id, types.mask());
    {
        std::lock_guard lock(cache_mutex_);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    std::vector<GeneratedPage> pages;
    for (const auto& page : book.pages) {
        GenerationResult r = generate_for_page(book, page.index, types, lexicons_, options_.generator.get());
        pages.push_back({std::move(r.pairs), r.fell_back, std::move(r.fallback_reason)});
    }
    std::lock_guard lock(cache_mutex_);
    // A concurrent caller may have filled the slot first; keep whichever landed.
    return cache_.emplace(key, std::move(pages)).first->second;
}

std::vector<ResolvedPage> StoryBuddyService::resolve(const Storybook& book, const PreferenceConfig& config) {
    const auto& pages = generated(book, config.enabled_types);
    const StoryOverrides* overrides = nullptr;
    if (const auto it = config.per_story_overrides.find(book.id); it != config.per_story_overrides.end()) {
        overrides = &it->second;
    }

    std::vector<ResolvedPage> out;
    for (std::size_t i = 0; i < pages.size(); ++i) {
        ResolvedPage page;
        page.page_index = book.pages[i].index;
        page.questions = pages[i].pairs;
        page.fell_back = pages[i].fell_back;
        page.fallback_reason = pages[i].fallback_reason;
        if (overrides != nullptr) {
            for (const auto& edit : overrides->edited) {
                if (edit.page_index != page.page_index) continue;
                const auto it = std::find_if(page.questions.begin(), page.questions.end(),
                                             [&](const QAPair& q) { return q.id == edit.id; });
                if (it != page.questions.end()) *it = edit;
            }
        }
        page.anchors = link_followups(page.page_index, page.questions, lexicons_.stopwords);
        if (!page.questions.empty()) {
            const std::string& top = page.questions.front().id;
            page.default_selection.push_back(top);
            if (const FollowUpLink* link = page.anchors.link_for(top)) {
                page.default_selection.push_back(link->followup_id);
            }
        }
        page.selected = page.default_selection;
        if (overrides != nullptr) {
            if (const auto sel = overrides->selected.find(page.page_index); sel != overrides->selected.end()) {
                page.selected.clear();
                for (const auto& id : sel->second) {
                    const bool known = std::any_of(page.questions.begin(), page.questions.end(),
                                                   [&](const QAPair& q) { return q.id == id; });
                    if (known) page.selected.push_back(id);
                }
            }
        }
        out.push_back(std::move(page));
    }
    return out;
}

json StoryBuddyService::questions_response(const Storybook& book, const std::vector<ResolvedPage>& pages,
                                           const TypeSet& types) const {
    json out_pages = json::array();
    for (const auto& page : pages) {
        json questions = json::array();
        for (const auto& qa : page.questions) {
            json q = qa_pair_to_json(qa);
            q["is_followup"] = page.anchors.is_followup(qa.id);
            questions.push_back(std::move(q));
        }
        json p = {{"page_index", page.page_index},
                  {"questions", questions},
                  {"anchors", anchor_set_to_json(page.anchors)},
                  {"default_selection", page.default_selection},
                  {"selected", page.selected},
                  {"fallback", page.fell_back}};
        if (page.fell_back) p["fallback_reason"] = page.fallback_reason;
        out_pages.push_back(std::move(p));
    }
    return {{"storybook_id", book.id}, {"enabled_types", type_set_to_json(types)}, {"pages", out_pages}};
}

ApiResponse StoryBuddyService::generate_questions(const std::string& story_id, const json& body) {
    return guarded([&] {
        const Storybook* book = library_.find(story_id);
        if (book == nullptr) return story_not_found(story_id);
        PreferenceConfig config = config_snapshot();
        if (body.is_object() && body.contains("enabled_types")) {
            config.enabled_types = type_set_from_json(body.at("enabled_types"));
        }
        if (config.enabled_types.empty()) {
            return error_response(422, "empty_type_set", "at least one question type must be enabled");
        }
        const auto pages = resolve(*book, config);
        return ok(questions_response(*book, pages, config.enabled_types));
    });
}

ApiResponse StoryBuddyService::edit_question(const std::string& story_id, const std::string& qa_id,
                                             const json& body) {
    return guarded([&] {
        const Storybook* book = library_.find(story_id);
        if (book == nullptr) return story_not_found(story_id);
        if (!body.is_object()) throw SchemaError("<root>");
        PreferenceConfig config = config_snapshot();
        const auto pages = resolve(*book, config);

        std::optional<QAPair> current;
        for (const auto& page : pages) {
            for (const auto& qa : page.questions) {
                if (qa.id == qa_id) current = qa;
            }
        }
        if (!current) {
            return error_response(404, "question_not_found", "no question '" + qa_id + "' in story '" + story_id + "'");
        }

        QAPair edited = *current;
        if (auto q = string_field(body, "question_text")) edited.question_text = std::move(*q);
        if (auto a = string_field(body, "answer_text")) edited.answer_text = std::move(*a);
        if (!ends_with_question_mark(edited.question_text)) {
            return error_response(422, "invalid_question", "a question must end with '?'");
        }
        if (normalize_answer(edited.answer_text).empty()) {
            return error_response(422, "empty_answer", "the answer must contain at least one word");
        }
        edited.type = classify_question_type(edited.question_text, lexicons_);
        edited.source = QASource::ParentEdited;
        edited.answer_span.reset();

        auto& edits = config.per_story_overrides[story_id].edited;
        const auto it = std::find_if(edits.begin(), edits.end(), [&](const QAPair& q) { return q.id == qa_id; });
        if (it != edits.end()) {
            *it = edited;
        } else {
            edits.push_back(edited);
        }
        store_config(std::move(config));

        json doc = qa_pair_to_json(edited);
        doc["accepted_phrases"] = matcher_->make_key(edited.id, edited.answer_text).accepted_phrases;
        return ok(doc);
    });
}

// --- preferences -----------------------------------------------------------

PreferenceConfig StoryBuddyService::config_snapshot() const {
    std::shared_lock lock(config_mutex_);
    return config_;
}

void StoryBuddyService::store_config(PreferenceConfig config) {
    std::unique_lock lock(config_mutex_);
    store_.save_config(preferences_to_json(config));
    config_ = std::move(config);
}

ApiResponse StoryBuddyService::get_preferences() const { return ok(preferences_to_json(config_snapshot())); }

ApiResponse StoryBuddyService::put_preferences(const json& body) {
    return guarded([&] {
        if (body.is_object() && body.contains("enabled_types") && body.at("enabled_types").is_array() &&
            body.at("enabled_types").empty()) {
            return error_response(422, "empty_type_set", "at least one question type must be enabled");
        }
        PreferenceConfig config = preferences_from_json(body);
        for (const auto& [story, overrides] : config.per_story_overrides) {
            const Storybook* book = library_.find(story);
            if (book == nullptr) throw ValidationError("overrides name unknown storybook '" + story + "'");
            // Check selections against the question set these preferences produce.
            PreferenceConfig probe = config;
            probe.per_story_overrides[story].selected.clear();
            const auto pages = resolve(*book, probe);
            for (const auto& [page, ids] : overrides.selected) {
                if (page < 1 || page > book->page_count()) {
                    throw ValidationError("selection names page " + std::to_string(page) + " of '" + story + "'");
                }
                const auto& qs = pages[static_cast<std::size_t>(page - 1)].questions;
                for (const auto& id : ids) {
                    const bool known =
                        std::any_of(qs.begin(), qs.end(), [&](const QAPair& q) { return q.id == id; });
                    if (!known) throw ValidationError("selection names unknown question '" + id + "'");
                }
            }
        }
        store_config(config);
        return ok(preferences_to_json(config));
    });
}

// --- sessions --------------------------------------------------------------

std::shared_ptr<StoryBuddyService::SessionSlot> StoryBuddyService::find_slot(const std::string& id) const {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void StoryBuddyService::persist(const Session& session) {
    store_.save_transcript(session.state().session_id, transcript_to_json(session.transcript()));
    write_index();
}

void StoryBuddyService::write_index() const {
    std::lock_guard index_lock(index_mutex_);
    std::vector<std::shared_ptr<SessionSlot>> slots;
    {
        std::shared_lock lock(sessions_mutex_);
        for (const auto& [id, slot] : sessions_) slots.push_back(slot);
    }
    json index = json::array();
    for (const auto& slot : slots) {
        std::unique_lock lock(slot->mutex, std::try_to_lock);
        // A slot busy with a transition writes the index itself when done.
        if (!lock.owns_lock()) {
            index.push_back({{"session_id", slot->session.transcript().session_id}});
            continue;
        }
        index.push_back(session_summary(slot->session));
    }
    store_.save_index(index);
}

ApiResponse StoryBuddyService::create_session(const json& body) {
    return guarded([&] {
        if (!body.is_object()) throw SchemaError("<root>");
        const std::string story_id = required_string(body, "storybook_id");
        const auto mode = parse_session_mode(required_string(body, "mode"));
        if (!mode) throw ValidationError("mode must be CoReading or BotReading");
        const Storybook* book = library_.find(story_id);
        if (book == nullptr) return story_not_found(story_id);

        const PreferenceConfig config = config_snapshot();
        const auto pages = resolve(*book, config);
        auto catalog = std::make_shared<SessionCatalog>();
        catalog->storybook = *book;
        for (const auto& page : pages) {
            catalog->questions.insert(catalog->questions.end(), page.questions.begin(), page.questions.end());
            catalog->anchors.push_back(page.anchors);
            if (!page.selected.empty()) catalog->plan[page.page_index] = page.selected;
        }

        const Timestamp now = entropy_.now();
        std::string id;
        {
            std::shared_lock lock(sessions_mutex_);
            do {
                id = entropy_.next_session_id();
            } while (sessions_.count(id) != 0);
        }
        Session session = Session::start(catalog, matcher_, id, *mode, now);
        std::vector<Transition> steps(1);
        steps.front().events = session.transcript().events;
        for (const auto& e : steps.front().events) {
            if (const auto* a = std::get_if<event::AgentUtterance>(&e.body)) steps.front().utterances.push_back(a->text);
        }
        for (auto& t : session.auto_advance(now)) steps.push_back(std::move(t));

        auto slot = std::make_shared<SessionSlot>(std::move(session));
        ApiResponse r;
        {
            std::lock_guard slot_lock(slot->mutex);
            {
                std::unique_lock lock(sessions_mutex_);
                sessions_.emplace(id, slot);
            }
            store_.save_transcript(id, transcript_to_json(slot->session.transcript()));
            r = ok(transition_json(slot->session, steps));
        }
        write_index();
        r.status = 201;
        return r;
    });
}

ApiResponse StoryBuddyService::post_event(const std::string& session_id, const json& body) {
    const auto slot = find_slot(session_id);
    if (!slot) return session_not_found(session_id);
    ApiResponse r;
    {
        std::lock_guard lock(slot->mutex);
        r = guarded([&] {
            if (!body.is_object()) throw SchemaError("<root>");
            Session& session = slot->session;
            if (session.state().phase == Phase::Finished) throw ProtocolError("the session has finished");
            const SessionEngine& engine = session.engine();
            const std::string kind = required_string(body, "kind");
            const Timestamp now = entropy_.now();

            std::vector<Transition> steps;
            if (kind == "ChildUtterance") {
                steps.push_back(session.apply(engine.submit_child_answer(session.state(), required_string(body, "text"), now)));
            } else if (kind == "OptionChosen") {
                const auto option = parse_child_option(required_string(body, "option"));
                if (!option) throw ValidationError("unknown option");
                steps.push_back(session.apply(engine.choose_option(session.state(), *option, now)));
                for (auto& t : session.auto_advance(now)) steps.push_back(std::move(t));
            } else if (kind == "PageTurn") {
                if (!body.contains("to_index") || !body.at("to_index").is_number_integer()) throw SchemaError("to_index");
                steps.push_back(session.apply(engine.turn_page(session.state(), body.at("to_index").get<int>(), now)));
            } else if (kind == "ParentJudge") {
                if (!body.contains("correct") || !body.at("correct").is_boolean()) throw SchemaError("correct");
                steps.push_back(session.apply(engine.parent_judge(session.state(), required_string(body, "qa_id"),
                                                                  body.at("correct").get<bool>(), now)));
            } else if (kind == "AskQuestion") {
                steps.push_back(session.apply(engine.ask_question(session.state(), required_string(body, "qa_id"), now)));
            } else if (kind == "EndSession") {
                steps.push_back(session.apply(engine.end_session(session.state(), now)));
            } else {
                throw ValidationError("unknown event kind '" + kind + "'");
            }
            store_.save_transcript(session_id, transcript_to_json(session.transcript()));
            return ok(transition_json(session, steps));
        });
    }
    if (r.status == 409) r.body["event"] = body;
    if (r.status < 300) write_index();
    return r;
}

ApiResponse StoryBuddyService::list_sessions() const {
    std::vector<std::shared_ptr<SessionSlot>> slots;
    {
        std::shared_lock lock(sessions_mutex_);
        for (const auto& [id, slot] : sessions_) slots.push_back(slot);
    }
    json out = json::array();
    for (const auto& slot : slots) {
        std::lock_guard lock(slot->mutex);
        out.push_back(session_summary(slot->session));
    }
    return ok({{"sessions", out}});
}

ApiResponse StoryBuddyService::get_session(const std::string& session_id) const {
    const auto slot = find_slot(session_id);
    if (!slot) return session_not_found(session_id);
    std::lock_guard lock(slot->mutex);
    return ok({{"transcript", transcript_to_json(slot->session.transcript())},
               {"state", session_state_to_json(slot->session.state())}});
}

// --- dashboard -------------------------------------------------------------

ApiResponse StoryBuddyService::session_dashboard(const std::string& session_id,
                                                 const std::optional<std::string>& type) const {
    return guarded([&] {
        const auto slot = find_slot(session_id);
        if (!slot) return session_not_found(session_id);
        std::optional<QuestionType> filter;
        if (type) {
            filter = parse_question_type(*type);
            if (!filter) return error_response(422, "unknown_type", "unknown question type '" + *type + "'");
        }
        SessionTranscript transcript;
        {
            std::lock_guard lock(slot->mutex);
            transcript = slot->session.transcript();
        }
        SessionStats stats = compute_session_stats(transcript, matcher_);
        if (filter) stats = filter_by_type(stats, *filter);
        return ok(session_stats_to_json(stats));
    });
}

ApiResponse StoryBuddyService::weekly_dashboard(const std::optional<std::string>& year,
                                                const std::optional<std::string>& week,
                                                const std::optional<std::string>& type) const {
    return guarded([&] {
        const auto y = year ? parse_int(*year) : std::nullopt;
        const auto w = week ? parse_int(*week) : std::nullopt;
        if (!y || !w || *y < 1 || *w < 1 || *w > iso_weeks_in_year(*y)) {
            return error_response(422, "invalid_week", "year and week must name an ISO-8601 week");
        }
        std::optional<QuestionType> filter;
        if (type) {
            filter = parse_question_type(*type);
            if (!filter) return error_response(422, "unknown_type", "unknown question type '" + *type + "'");
        }
        const IsoWeek target{*y, *w};

        std::vector<SessionTranscript> transcripts;
        {
            std::shared_lock lock(sessions_mutex_);
            for (const auto& [id, slot] : sessions_) {
                std::lock_guard slot_lock(slot->mutex);
                if (iso_week_of(slot->session.state().started_at, options_.utc_offset_minutes) == target) {
                    transcripts.push_back(slot->session.transcript());
                }
            }
        }
        std::vector<SessionStats> stats;
        for (const auto& t : transcripts) stats.push_back(compute_session_stats(t, matcher_));
        WeeklyStats weekly = aggregate_weekly(stats, target, options_.utc_offset_minutes);
        if (filter) weekly = filter_by_type(weekly, *filter);
        return ok(weekly_stats_to_json(weekly));
    });
}

// --- speech ----------------------------------------------------------------

ApiResponse StoryBuddyService::speech(const std::string& text) const {
    try {
        const Audio audio = options_.speech->synthesize(text);
        ApiResponse r;
        r.raw = audio.bytes;
        r.content_type = audio.media_type;
        return r;
    } catch (const RemoteError& e) {
        return error_response(502, "speech_unavailable", e.what());
    } catch (const ValidationError& e) {
        return error_response(404, "speech_not_found", e.what());
    }
}

}  // namespace storybuddy::service
