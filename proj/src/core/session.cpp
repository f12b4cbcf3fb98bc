#include "storybuddy/session.hpp"

#include "storybuddy/error.hpp"

#include <algorithm>
#include <cstdio>

namespace storybuddy {

using nlohmann::json;

// --- names -----------------------------------------------------------------

std::string_view to_string(SessionMode mode) {
    return mode == SessionMode::CoReading ? "CoReading" : "BotReading";
}

std::string_view to_string(Phase phase) {
    switch (phase) {
        case Phase::Greeting: return "Greeting";
        case Phase::Reading: return "Reading";
        case Phase::AwaitingAnswer: return "AwaitingAnswer";
        case Phase::Feedback: return "Feedback";
        case Phase::Finished: return "Finished";
    }
    return "Greeting";
}

std::string_view to_string(ChildOption option) {
    switch (option) {
        case ChildOption::MoveToNextPage: return "MoveToNextPage";
        case ChildOption::TryAnotherQuestion: return "TryAnotherQuestion";
        case ChildOption::TryAgain: return "TryAgain";
    }
    return "MoveToNextPage";
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Correct: return "Correct";
        case Verdict::Incorrect: return "Incorrect";
        case Verdict::ParentCorrect: return "ParentCorrect";
        case Verdict::ParentIncorrect: return "ParentIncorrect";
    }
    return "Incorrect";
}

std::optional<SessionMode> parse_session_mode(std::string_view name) {
    if (name == "CoReading") return SessionMode::CoReading;
    if (name == "BotReading") return SessionMode::BotReading;
    return std::nullopt;
}

std::optional<ChildOption> parse_child_option(std::string_view name) {
    for (auto o : {ChildOption::MoveToNextPage, ChildOption::TryAnotherQuestion, ChildOption::TryAgain}) {
        if (to_string(o) == name) return o;
    }
    return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view name) {
    for (auto v : {Verdict::Correct, Verdict::Incorrect, Verdict::ParentCorrect, Verdict::ParentIncorrect}) {
        if (to_string(v) == name) return v;
    }
    return std::nullopt;
}

// --- time ------------------------------------------------------------------

std::string format_rfc3339(Timestamp t) {
    using namespace std::chrono;
    const auto day = floor<days>(t);
    const year_month_day ymd{day};
    const hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

Timestamp parse_rfc3339(std::string_view text) {
    using namespace std::chrono;
    int y = 0;
    unsigned mo = 0;
    unsigned d = 0;
    int h = 0;
    int mi = 0;
    int s = 0;
    int consumed = 0;
    const std::string str(text);
    if (std::sscanf(str.c_str(), "%4d-%2u-%2uT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6 ||
        consumed != 19) {
        throw ValidationError("invalid RFC 3339 timestamp '" + str + "'");
    }
    const year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) throw ValidationError("invalid RFC 3339 timestamp '" + str + "'");
    std::size_t pos = 19;
    if (pos < str.size() && str[pos] == '.') {
        ++pos;
        while (pos < str.size() && str[pos] >= '0' && str[pos] <= '9') ++pos;
    }
    seconds offset{0};
    if (pos < str.size() && (str[pos] == 'Z' || str[pos] == 'z')) {
        ++pos;
    } else if (pos < str.size() && (str[pos] == '+' || str[pos] == '-')) {
        int oh = 0;
        int om = 0;
        if (std::sscanf(str.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2 || str.size() != pos + 6) {
            throw ValidationError("invalid RFC 3339 offset in '" + str + "'");
        }
        offset = hours{oh} + minutes{om};
        if (str[pos] == '-') offset = -offset;
        pos += 6;
    } else {
        throw ValidationError("RFC 3339 timestamp lacks a zone: '" + str + "'");
    }
    if (pos != str.size()) throw ValidationError("trailing characters in timestamp '" + str + "'");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} - offset;
}

// --- catalog ---------------------------------------------------------------

const QAPair* SessionCatalog::find(std::string_view qa_id) const {
    const auto it = std::find_if(questions.begin(), questions.end(), [&](const QAPair& q) { return q.id == qa_id; });
    return it == questions.end() ? nullptr : &*it;
}

const AnchorSet* SessionCatalog::anchors_for(int page_index) const {
    const auto it = std::find_if(anchors.begin(), anchors.end(),
                                 [&](const AnchorSet& a) { return a.page_index == page_index; });
    return it == anchors.end() ? nullptr : &*it;
}

bool SessionCatalog::is_followup(const QAPair& qa) const {
    const AnchorSet* set = anchors_for(qa.page_index);
    return set != nullptr && set->is_followup(qa.id);
}

void SessionCatalog::validate() const {
    if (storybook.pages.empty()) throw ValidationError("storybook '" + storybook.id + "' has no pages");
    for (const auto& [page, ids] : plan) {
        if (page < 1 || page > storybook.page_count()) {
            throw ValidationError("plan references page " + std::to_string(page) + " of a " +
                                  std::to_string(storybook.page_count()) + "-page book");
        }
        for (const auto& id : ids) {
            const QAPair* qa = find(id);
            if (qa == nullptr) throw ValidationError("plan references unknown question '" + id + "'");
            if (qa->page_index != page) {
                throw ValidationError("question '" + id + "' is not on page " + std::to_string(page));
            }
        }
    }
}

// --- engine ----------------------------------------------------------------

namespace {

void require_mode(const SessionState& s, SessionMode mode, std::string_view op) {
    if (s.mode != mode) {
        throw ProtocolError(std::string(op) + " is not available in " + std::string(to_string(s.mode)) + " mode");
    }
}

void require_phase(const SessionState& s, std::initializer_list<Phase> allowed, std::string_view op) {
    if (std::find(allowed.begin(), allowed.end(), s.phase) == allowed.end()) {
        throw ProtocolError(std::string(op) + " is not allowed in phase " + std::string(to_string(s.phase)));
    }
}

void emit_agent(Transition& t, Timestamp now, std::string text, std::optional<std::string> qa_id = std::nullopt) {
    t.utterances.push_back(text);
    t.events.push_back({now, event::AgentUtterance{std::move(text), std::move(qa_id)}});
}

void emit_options(Transition& t, Timestamp now, std::vector<ChildOption> options) {
    t.options = options;
    t.state.offered = options;
    t.events.push_back({now, event::OptionsShown{std::move(options)}});
}

bool has_text(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return c != ' ' && c != '\t' && c != '\n' && c != '\r'; });
}

}  // namespace

SessionEngine::SessionEngine(std::shared_ptr<const SessionCatalog> catalog, std::shared_ptr<const AnswerMatcher> matcher)
    : catalog_(std::move(catalog)), matcher_(std::move(matcher)) {
    for (const auto& qa : catalog_->questions) {
        if (!normalize_answer(qa.answer_text).empty()) keys_.emplace(qa.id, matcher_->make_key(qa.id, qa.answer_text));
    }
}

SessionState SessionEngine::initial_state(std::string session_id, SessionMode mode, Timestamp started_at) const {
    SessionState s;
    s.session_id = std::move(session_id);
    s.storybook_id = catalog_->storybook.id;
    s.mode = mode;
    s.current_page = 1;
    s.phase = Phase::Greeting;
    s.selected_plan = catalog_->plan;
    s.started_at = started_at;
    return s;
}

std::vector<std::string> SessionEngine::remaining_on_page(const SessionState& s) const {
    std::vector<std::string> out;
    const auto it = s.selected_plan.find(s.current_page);
    if (it == s.selected_plan.end()) return out;
    for (const auto& id : it->second) {
        if (s.asked.count(id) == 0 && s.active_qa != id) out.push_back(id);
    }
    return out;
}

Transition SessionEngine::start(const SessionState& s, Timestamp now) const {
    require_phase(s, {Phase::Greeting}, "start");
    Transition t;
    t.state = s;
    t.state.phase = Phase::Reading;
    t.state.current_page = 1;
    if (s.mode == SessionMode::BotReading) {
        emit_agent(t, now, std::string(kGreeting));
        emit_agent(t, now, catalog_->storybook.page(1).text);
    }
    return t;
}

Transition SessionEngine::ask(const SessionState& s, const QAPair& qa, Timestamp now) const {
    Transition t;
    t.state = s;
    t.state.phase = Phase::AwaitingAnswer;
    t.state.active_qa = qa.id;
    t.state.asked.insert(qa.id);
    t.state.offered.clear();
    emit_agent(t, now, std::string(kQuestionIntro));
    emit_agent(t, now, qa.question_text, qa.id);
    return t;
}

Transition SessionEngine::bot_ask_next(const SessionState& s, Timestamp now) const {
    require_mode(s, SessionMode::BotReading, "bot_ask_next");
    require_phase(s, {Phase::Reading}, "bot_ask_next");
    if (!s.offered.empty()) throw ProtocolError("bot_ask_next: page already complete, choose an option");
    const auto remaining = remaining_on_page(s);
    if (remaining.empty()) {
        Transition t;
        t.state = s;
        t.state.active_qa.reset();
        emit_options(t, now, {ChildOption::MoveToNextPage});
        return t;
    }
    return ask(s, *catalog_->find(remaining.front()), now);
}

Transition SessionEngine::ask_question(const SessionState& s, const std::string& qa_id, Timestamp now) const {
    require_mode(s, SessionMode::CoReading, "ask_question");
    require_phase(s, {Phase::Reading, Phase::Feedback}, "ask_question");
    const QAPair* qa = catalog_->find(qa_id);
    if (qa == nullptr || qa->page_index != s.current_page) {
        throw ValidationError("question '" + qa_id + "' is not shown on page " + std::to_string(s.current_page));
    }
    SessionState cleared = s;
    cleared.active_qa.reset();
    return ask(cleared, *qa, now);
}

std::vector<ChildOption> SessionEngine::feedback_options(const SessionState& s, bool correct,
                                                         const std::string& qa_id) const {
    std::vector<ChildOption> options;
    const auto it = s.incorrect.find(qa_id);
    const int misses = it == s.incorrect.end() ? 0 : it->second;
    if (!correct && misses < kMaxIncorrectAttempts) options.push_back(ChildOption::TryAgain);
    if (!remaining_on_page(s).empty()) options.push_back(ChildOption::TryAnotherQuestion);
    options.push_back(ChildOption::MoveToNextPage);
    return options;
}

Transition SessionEngine::submit_child_answer(const SessionState& s, const std::string& utterance,
                                              Timestamp now) const {
    require_phase(s, {Phase::AwaitingAnswer}, "submit_child_answer");
    const std::string& qa_id = *s.active_qa;
    const QAPair& qa = *catalog_->find(qa_id);

    bool correct = false;
    if (s.mode == SessionMode::BotReading && qa.type == QuestionType::Prediction) {
        correct = has_text(utterance);
    } else if (const auto key = keys_.find(qa_id); key != keys_.end()) {
        correct = matcher_->judge(utterance, key->second).correct();
    }

    Transition t;
    t.state = s;
    const int attempt_number = ++t.state.attempts[qa_id];
    if (!correct) ++t.state.incorrect[qa_id];
    t.state.phase = Phase::Feedback;
    t.verdict = correct ? Verdict::Correct : Verdict::Incorrect;

    AttemptRecord record{qa_id, qa.type, utterance, *t.verdict, attempt_number, now, catalog_->is_followup(qa)};
    t.events.push_back({now, event::ChildUtterance{utterance}});
    t.events.push_back({now, event::Attempt{std::move(record)}});
    emit_agent(t, now, std::string(correct ? kPraise : kNotQuite));
    emit_options(t, now, feedback_options(t.state, correct, qa_id));
    return t;
}

Transition SessionEngine::parent_judge(const SessionState& s, const std::string& qa_id, bool correct,
                                       Timestamp now) const {
    require_mode(s, SessionMode::CoReading, "parent_judge");
    require_phase(s, {Phase::Reading, Phase::Feedback}, "parent_judge");
    const QAPair* qa = catalog_->find(qa_id);
    if (qa == nullptr || qa->page_index != s.current_page) {
        throw ValidationError("question '" + qa_id + "' is not shown on page " + std::to_string(s.current_page));
    }

    Transition t;
    t.state = s;
    const int attempt_number = ++t.state.attempts[qa_id];
    if (!correct) ++t.state.incorrect[qa_id];
    t.verdict = correct ? Verdict::ParentCorrect : Verdict::ParentIncorrect;
    t.state.asked.insert(qa_id);
    t.state.phase = Phase::Reading;
    t.state.active_qa.reset();
    t.state.offered.clear();

    if (const AnchorSet* set = catalog_->anchors_for(qa->page_index)) {
        if (const FollowUpLink* link = set->link_for(qa_id); link != nullptr && s.asked.count(link->followup_id) == 0) {
            t.followup = *catalog_->find(link->followup_id);
            t.state.asked.insert(link->followup_id);
        }
    }
    AttemptRecord record{qa_id, qa->type, "", *t.verdict, attempt_number, now, catalog_->is_followup(*qa)};
    t.events.push_back({now, event::Attempt{std::move(record)}});
    return t;
}

Transition SessionEngine::choose_option(const SessionState& s, ChildOption option, Timestamp now) const {
    require_phase(s, {Phase::Reading, Phase::Feedback}, "choose_option");
    if (std::find(s.offered.begin(), s.offered.end(), option) == s.offered.end()) {
        throw ProtocolError("option " + std::string(to_string(option)) + " was not offered");
    }
    SessionState next = s;
    next.offered.clear();
    Transition t;
    switch (option) {
        case ChildOption::TryAgain: {
            t.state = next;
            t.state.phase = Phase::AwaitingAnswer;
            emit_agent(t, now, catalog_->find(*s.active_qa)->question_text, *s.active_qa);
            break;
        }
        case ChildOption::TryAnotherQuestion: {
            next.active_qa.reset();
            next.phase = Phase::Reading;
            const auto remaining = remaining_on_page(next);
            if (remaining.empty()) throw ProtocolError("no other question remains on this page");
            t = ask(next, *catalog_->find(remaining.front()), now);
            break;
        }
        case ChildOption::MoveToNextPage: {
            next.active_qa.reset();
            t.state = next;
            if (s.current_page < catalog_->storybook.page_count()) {
                t.state.current_page = s.current_page + 1;
                t.state.phase = Phase::Reading;
                t.events.push_back({now, event::PageTurn{t.state.current_page}});
                if (s.mode == SessionMode::BotReading) {
                    emit_agent(t, now, catalog_->storybook.page(t.state.current_page).text);
                }
            } else {
                t.state.phase = Phase::Finished;
                emit_agent(t, now, std::string(kClosing));
            }
            break;
        }
    }
    t.events.insert(t.events.begin(), Event{now, event::OptionChosen{option}});
    return t;
}

Transition SessionEngine::turn_page(const SessionState& s, int to_index, Timestamp now) const {
    require_mode(s, SessionMode::CoReading, "turn_page");
    require_phase(s, {Phase::Reading, Phase::Feedback}, "turn_page");
    if (to_index < 1 || to_index > catalog_->storybook.page_count()) {
        throw ValidationError("page " + std::to_string(to_index) + " does not exist");
    }
    if (to_index == s.current_page) throw ProtocolError("already on page " + std::to_string(to_index));
    Transition t;
    t.state = s;
    t.state.current_page = to_index;
    t.state.phase = Phase::Reading;
    t.state.active_qa.reset();
    t.state.offered.clear();
    t.events.push_back({now, event::PageTurn{to_index}});
    return t;
}

Transition SessionEngine::end_session(const SessionState& s, Timestamp now) const {
    require_mode(s, SessionMode::CoReading, "end_session");
    require_phase(s, {Phase::Reading, Phase::Feedback}, "end_session");
    Transition t;
    t.state = s;
    t.state.phase = Phase::Finished;
    t.state.active_qa.reset();
    t.state.offered.clear();
    emit_agent(t, now, std::string(kClosing));
    return t;
}

// --- live session ----------------------------------------------------------

Session::Session(SessionEngine engine, SessionTranscript transcript, SessionState state)
    : engine_(std::move(engine)), transcript_(std::move(transcript)), state_(std::move(state)) {}

Session Session::start(std::shared_ptr<const SessionCatalog> catalog, std::shared_ptr<const AnswerMatcher> matcher,
                       std::string session_id, SessionMode mode, Timestamp now) {
    catalog->validate();
    SessionEngine engine(catalog, std::move(matcher));
    SessionState initial = engine.initial_state(session_id, mode, now);
    SessionTranscript transcript{std::move(session_id), mode, now, std::move(catalog), {}};
    Session session(std::move(engine), std::move(transcript), std::move(initial));
    session.apply(session.engine_.start(session.state_, now));
    return session;
}

Session Session::resume(SessionTranscript transcript, std::shared_ptr<const AnswerMatcher> matcher) {
    SessionState state = replay(transcript, matcher);
    SessionEngine engine(transcript.catalog, std::move(matcher));
    return Session(std::move(engine), std::move(transcript), std::move(state));
}

const Transition& Session::apply(Transition t) {
    for (const auto& e : t.events) transcript_.events.push_back(e);
    state_ = t.state;
    last_ = std::move(t);
    return last_;
}

std::vector<Transition> Session::auto_advance(Timestamp now) {
    std::vector<Transition> out;
    while (state_.mode == SessionMode::BotReading && state_.phase == Phase::Reading && state_.offered.empty()) {
        out.push_back(apply(engine_.bot_ask_next(state_, now)));
    }
    return out;
}

// --- replay ----------------------------------------------------------------

namespace {

template <class T>
const T* as(const Event& e) {
    return std::get_if<T>(&e.body);
}

}  // namespace

SessionState replay(const SessionTranscript& transcript, std::shared_ptr<const AnswerMatcher> matcher) {
    const SessionEngine engine(transcript.catalog, std::move(matcher));
    const auto& events = transcript.events;
    SessionState state = engine.initial_state(transcript.session_id, transcript.mode, transcript.started_at);

    std::size_t idx = 0;
    auto consume = [&](const Transition& t) {
        for (std::size_t k = 0; k < t.events.size(); ++k) {
            if (idx + k >= events.size()) throw CorruptionError(idx + k, "transcript ends mid-transition");
            if (!(events[idx + k] == t.events[k])) {
                throw CorruptionError(idx + k, "event does not match the automaton's output");
            }
        }
        idx += t.events.size();
        state = t.state;
    };
    auto guarded = [&](auto&& op) {
        try {
            return op();
        } catch (const CorruptionError&) {
            throw;
        } catch (const Error& e) {
            throw CorruptionError(idx, e.what());
        }
    };

    if (transcript.mode == SessionMode::CoReading || !events.empty()) {
        const Timestamp now = events.empty() ? transcript.started_at : events.front().at;
        consume(guarded([&] { return engine.start(state, now); }));
    }

    while (idx < events.size()) {
        const Event& e = events[idx];
        if (idx > 0 && e.at < events[idx - 1].at) throw CorruptionError(idx, "timestamps go backwards");
        if (state.phase == Phase::Finished) throw CorruptionError(idx, "event after the session finished");

        const Transition t = guarded([&]() -> Transition {
            if (const auto* chosen = as<event::OptionChosen>(e)) {
                return engine.choose_option(state, chosen->option, e.at);
            }
            if (state.phase == Phase::AwaitingAnswer) {
                const auto* said = as<event::ChildUtterance>(e);
                if (said == nullptr) throw CorruptionError(idx, "expected the child's answer");
                return engine.submit_child_answer(state, said->text, e.at);
            }
            if (state.mode == SessionMode::BotReading) {
                if (state.phase == Phase::Reading && state.offered.empty()) return engine.bot_ask_next(state, e.at);
                throw CorruptionError(idx, "unexpected event in bot-reading mode");
            }
            if (const auto* turn = as<event::PageTurn>(e)) return engine.turn_page(state, turn->to_index, e.at);
            if (const auto* attempt = as<event::Attempt>(e)) {
                const Verdict v = attempt->record.verdict;
                if (v != Verdict::ParentCorrect && v != Verdict::ParentIncorrect) {
                    throw CorruptionError(idx, "child verdict without a child answer");
                }
                return engine.parent_judge(state, attempt->record.qa_id, v == Verdict::ParentCorrect, e.at);
            }
            if (const auto* agent = as<event::AgentUtterance>(e)) {
                if (agent->text == kClosing) return engine.end_session(state, e.at);
                if (agent->text == kQuestionIntro && idx + 1 < events.size()) {
                    const auto* question = as<event::AgentUtterance>(events[idx + 1]);
                    if (question != nullptr && question->qa_id) return engine.ask_question(state, *question->qa_id, e.at);
                }
            }
            throw CorruptionError(idx, "unexpected event in co-reading mode");
        });
        consume(t);
    }
    return state;
}

// --- JSON ------------------------------------------------------------------

json attempt_to_json(const AttemptRecord& r) {
    return {{"qa_id", r.qa_id},
            {"question_type", to_string(r.question_type)},
            {"utterance", r.utterance},
            {"verdict", to_string(r.verdict)},
            {"attempt_number", r.attempt_number},
            {"timestamp", format_rfc3339(r.timestamp)},
            {"is_followup", r.is_followup}};
}

json event_to_json(const Event& e) {
    json doc = std::visit(
        [](const auto& body) -> json {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, event::AgentUtterance>) {
                json j = {{"kind", "AgentUtterance"}, {"text", body.text}};
                if (body.qa_id) j["qa_id"] = *body.qa_id;
                return j;
            } else if constexpr (std::is_same_v<T, event::ChildUtterance>) {
                return {{"kind", "ChildUtterance"}, {"text", body.text}};
            } else if constexpr (std::is_same_v<T, event::OptionsShown>) {
                json opts = json::array();
                for (auto o : body.options) opts.push_back(to_string(o));
                return {{"kind", "OptionsShown"}, {"options", opts}};
            } else if constexpr (std::is_same_v<T, event::OptionChosen>) {
                return {{"kind", "OptionChosen"}, {"option", to_string(body.option)}};
            } else if constexpr (std::is_same_v<T, event::PageTurn>) {
                return {{"kind", "PageTurn"}, {"to_index", body.to_index}};
            } else {
                json j = attempt_to_json(body.record);
                j["kind"] = "Attempt";
                return j;
            }
        },
        e.body);
    doc["at"] = format_rfc3339(e.at);
    return doc;
}

namespace {

std::string get_string(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_string()) throw SchemaError(key);
    return it->get<std::string>();
}

int get_int(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_number_integer()) throw SchemaError(key);
    return it->get<int>();
}

}  // namespace

Event event_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("event");
    Event e;
    e.at = parse_rfc3339(get_string(doc, "at"));
    const std::string kind = get_string(doc, "kind");
    if (kind == "AgentUtterance") {
        event::AgentUtterance body{get_string(doc, "text"), std::nullopt};
        if (doc.contains("qa_id")) body.qa_id = get_string(doc, "qa_id");
        e.body = std::move(body);
    } else if (kind == "ChildUtterance") {
        e.body = event::ChildUtterance{get_string(doc, "text")};
    } else if (kind == "OptionsShown") {
        event::OptionsShown body;
        if (!doc.contains("options") || !doc.at("options").is_array()) throw SchemaError("options");
        for (const auto& o : doc.at("options")) {
            const auto opt = o.is_string() ? parse_child_option(o.get<std::string>()) : std::nullopt;
            if (!opt) throw SchemaError("options");
            body.options.push_back(*opt);
        }
        e.body = std::move(body);
    } else if (kind == "OptionChosen") {
        const auto opt = parse_child_option(get_string(doc, "option"));
        if (!opt) throw SchemaError("option");
        e.body = event::OptionChosen{*opt};
    } else if (kind == "PageTurn") {
        e.body = event::PageTurn{get_int(doc, "to_index")};
    } else if (kind == "Attempt") {
        AttemptRecord r;
        r.qa_id = get_string(doc, "qa_id");
        const auto type = parse_question_type(get_string(doc, "question_type"));
        const auto verdict = parse_verdict(get_string(doc, "verdict"));
        if (!type) throw SchemaError("question_type");
        if (!verdict) throw SchemaError("verdict");
        r.question_type = *type;
        r.verdict = *verdict;
        r.utterance = get_string(doc, "utterance");
        r.attempt_number = get_int(doc, "attempt_number");
        r.timestamp = e.at;
        if (!doc.contains("is_followup") || !doc.at("is_followup").is_boolean()) throw SchemaError("is_followup");
        r.is_followup = doc.at("is_followup").get<bool>();
        e.body = event::Attempt{std::move(r)};
    } else {
        throw SchemaError("kind");
    }
    return e;
}

json transcript_to_json(const SessionTranscript& t) {
    json questions = json::array();
    for (const auto& q : t.catalog->questions) questions.push_back(qa_pair_to_json(q));
    json anchors = json::array();
    for (const auto& a : t.catalog->anchors) anchors.push_back(anchor_set_to_json(a));
    json plan = json::object();
    for (const auto& [page, ids] : t.catalog->plan) plan[std::to_string(page)] = ids;
    json events = json::array();
    for (const auto& e : t.events) events.push_back(event_to_json(e));
    return {{"session_id", t.session_id},
            {"storybook_id", t.storybook_id()},
            {"mode", to_string(t.mode)},
            {"started_at", format_rfc3339(t.started_at)},
            {"storybook", json(storybook_to_json(t.catalog->storybook))},
            {"questions", questions},
            {"anchors", anchors},
            {"plan", plan},
            {"events", events}};
}

SessionTranscript transcript_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("<root>");
    SessionTranscript t;
    t.session_id = get_string(doc, "session_id");
    const auto mode = parse_session_mode(get_string(doc, "mode"));
    if (!mode) throw SchemaError("mode");
    t.mode = *mode;
    t.started_at = parse_rfc3339(get_string(doc, "started_at"));

    auto catalog = std::make_shared<SessionCatalog>();
    if (!doc.contains("storybook")) throw SchemaError("storybook");
    catalog->storybook = storybook_from_json(doc.at("storybook"));
    if (catalog->storybook.id != get_string(doc, "storybook_id")) throw ValidationError("storybook_id mismatch");
    if (doc.contains("questions")) {
        for (const auto& q : doc.at("questions")) catalog->questions.push_back(qa_pair_from_json(q));
    }
    if (doc.contains("anchors")) {
        for (const auto& a : doc.at("anchors")) catalog->anchors.push_back(anchor_set_from_json(a));
    }
    if (doc.contains("plan")) {
        for (const auto& [page, ids] : doc.at("plan").items()) {
            catalog->plan[std::stoi(page)] = ids.get<std::vector<std::string>>();
        }
    }
    t.catalog = std::move(catalog);

    if (!doc.contains("events") || !doc.at("events").is_array()) throw SchemaError("events");
    for (const auto& e : doc.at("events")) t.events.push_back(event_from_json(e));
    return t;
}

json session_state_to_json(const SessionState& s) {
    json plan = json::object();
    for (const auto& [page, ids] : s.selected_plan) plan[std::to_string(page)] = ids;
    json offered = json::array();
    for (auto o : s.offered) offered.push_back(to_string(o));
    json doc = {{"session_id", s.session_id},
                {"storybook_id", s.storybook_id},
                {"mode", to_string(s.mode)},
                {"current_page", s.current_page},
                {"phase", to_string(s.phase)},
                {"active_qa", s.active_qa ? json(*s.active_qa) : json(nullptr)},
                {"asked_on_page", s.asked},
                {"selected_plan", plan},
                {"started_at", format_rfc3339(s.started_at)},
                {"options", offered},
                {"attempts", s.attempts}};
    return doc;
}

}  // namespace storybuddy
