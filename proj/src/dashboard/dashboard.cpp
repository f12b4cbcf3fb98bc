#include "storybuddy/dashboard.hpp"

#include "storybuddy/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace storybuddy {

using nlohmann::json;

std::optional<Rational> StatsCounts::accuracy() const {
    if (questions_attempted == 0) return std::nullopt;
    return Rational(first_attempt_correct, questions_attempted);
}

std::optional<Rational> StatsCounts::eventual_accuracy() const {
    if (questions_attempted == 0) return std::nullopt;
    return Rational(eventually_correct, questions_attempted);
}

StatsCounts& StatsCounts::operator+=(const StatsCounts& other) {
    questions_attempted += other.questions_attempted;
    first_attempt_correct += other.first_attempt_correct;
    eventually_correct += other.eventually_correct;
    total_attempts += other.total_attempts;
    followups_attempted += other.followups_attempted;
    for (const auto& [type, s] : other.per_type) {
        auto& mine = per_type[type];
        mine.attempted += s.attempted;
        mine.first_attempt_correct += s.first_attempt_correct;
        mine.attempts += s.attempts;
    }
    return *this;
}

// --- ISO weeks -------------------------------------------------------------

IsoWeek iso_week_of(Timestamp t, int utc_offset_minutes) {
    using namespace std::chrono;
    const auto local = t + minutes{utc_offset_minutes};
    const sys_days day = floor<days>(local);
    const unsigned iso_wd = weekday{day}.iso_encoding();  // Monday = 1
    const sys_days thursday = day - days{iso_wd - 1} + days{3};
    const year y = year_month_day{thursday}.year();
    const sys_days jan1 = y / January / 1;
    return {static_cast<int>(y), static_cast<int>((thursday - jan1).count() / 7 + 1)};
}

int iso_weeks_in_year(int year) {
    using namespace std::chrono;
    const sys_days dec28 = std::chrono::year{year} / December / 28;
    return iso_week_of(dec28).week;
}

IsoWeek parse_iso_week(std::string_view text) {
    const std::string s(text);
    IsoWeek w;
    int consumed = 0;
    const bool ok = (std::sscanf(s.c_str(), "%4d-W%2d%n", &w.year, &w.week, &consumed) == 2 ||
                     std::sscanf(s.c_str(), "%4d-%2d%n", &w.year, &w.week, &consumed) == 2) &&
                    static_cast<std::size_t>(consumed) == s.size() && s.size() >= 7;
    if (!ok || w.year < 1 || w.week < 1 || w.week > iso_weeks_in_year(w.year)) {
        throw ValidationError("malformed ISO week '" + s + "'");
    }
    return w;
}

// --- per-session -----------------------------------------------------------

SessionStats tally_session(const SessionTranscript& transcript) {
    SessionStats out;
    out.session_id = transcript.session_id;
    out.storybook_id = transcript.storybook_id();
    out.started_at = transcript.started_at;

    struct Seen {
        bool first_correct = false;
        bool eventually = false;
        bool followup = false;
        QuestionType type = QuestionType::Action;
        int attempts = 0;
    };
    std::map<std::string, Seen> seen;
    std::vector<std::string> order;

    for (const auto& e : transcript.events) {
        const auto* attempt = std::get_if<event::Attempt>(&e.body);
        if (attempt == nullptr) continue;
        const AttemptRecord& r = attempt->record;
        auto [it, fresh] = seen.try_emplace(r.qa_id);
        Seen& q = it->second;
        if (fresh) {
            order.push_back(r.qa_id);
            q.first_correct = is_correct(r.verdict);
            q.type = r.question_type;
            q.followup = r.is_followup;
            const QAPair* qa = transcript.catalog->find(r.qa_id);
            out.per_question.push_back({r.qa_id, qa ? qa->question_text : std::string(), r.question_type, {},
                                        qa ? qa->answer_text : std::string()});
        }
        q.eventually = q.eventually || is_correct(r.verdict);
        ++q.attempts;
        const auto detail = std::find_if(out.per_question.begin(), out.per_question.end(),
                                         [&](const QuestionDetail& d) { return d.qa_id == r.qa_id; });
        detail->attempts.push_back({r.utterance, r.verdict});
    }

    StatsCounts& c = out.counts;
    for (const auto& id : order) {
        const Seen& q = seen.at(id);
        ++c.questions_attempted;
        c.first_attempt_correct += q.first_correct ? 1 : 0;
        c.eventually_correct += q.eventually ? 1 : 0;
        c.total_attempts += q.attempts;
        c.followups_attempted += q.followup ? 1 : 0;
        auto& t = c.per_type[q.type];
        ++t.attempted;
        t.first_attempt_correct += q.first_correct ? 1 : 0;
        t.attempts += q.attempts;
    }
    return out;
}

SessionStats compute_session_stats(const SessionTranscript& transcript, std::shared_ptr<const AnswerMatcher> matcher) {
    replay(transcript, std::move(matcher));
    return tally_session(transcript);
}

// --- weekly ----------------------------------------------------------------

namespace {

std::map<QuestionType, Rational> proportions(const StatsCounts& c) {
    std::map<QuestionType, Rational> out;
    if (c.questions_attempted == 0) return out;
    for (const auto& [type, s] : c.per_type) out.emplace(type, Rational(s.attempted, c.questions_attempted));
    return out;
}

}  // namespace

WeeklyStats aggregate_weekly(const std::vector<SessionStats>& stats, IsoWeek week, int utc_offset_minutes) {
    WeeklyStats out;
    out.iso_week = week;
    for (const auto& s : stats) {
        if (iso_week_of(s.started_at, utc_offset_minutes) != week) {
            throw ValidationError("session '" + s.session_id + "' did not start in week " +
                                  std::to_string(week.year) + "-W" + std::to_string(week.week));
        }
        out.sessions.push_back(s.session_id);
        out.aggregate += s.counts;
    }
    out.type_proportions = proportions(out.aggregate);
    return out;
}

namespace {

StatsCounts restrict(const StatsCounts& c, QuestionType type) {
    StatsCounts out;
    const auto it = c.per_type.find(type);
    if (it == c.per_type.end()) return out;
    out.per_type.emplace(type, it->second);
    out.questions_attempted = it->second.attempted;
    out.first_attempt_correct = it->second.first_attempt_correct;
    out.total_attempts = it->second.attempts;
    return out;
}

}  // namespace

SessionStats filter_by_type(const SessionStats& stats, QuestionType type) {
    SessionStats out;
    out.session_id = stats.session_id;
    out.storybook_id = stats.storybook_id;
    out.started_at = stats.started_at;
    out.counts = restrict(stats.counts, type);
    // Counters not kept per type are recounted from the question details.
    for (const auto& q : stats.per_question) {
        if (q.type != type) continue;
        out.per_question.push_back(q);
        if (std::any_of(q.attempts.begin(), q.attempts.end(),
                        [](const QuestionAttempt& a) { return is_correct(a.verdict); })) {
            ++out.counts.eventually_correct;
        }
    }
    return out;
}

WeeklyStats filter_by_type(const WeeklyStats& stats, QuestionType type) {
    WeeklyStats out;
    out.iso_week = stats.iso_week;
    out.sessions = stats.sessions;
    out.aggregate = restrict(stats.aggregate, type);
    out.type_proportions = proportions(out.aggregate);
    return out;
}

// --- JSON ------------------------------------------------------------------

namespace {

json optional_rational(const std::optional<Rational>& r) { return r ? rational_to_json(*r) : json(nullptr); }

json counts_to_json(const StatsCounts& c) {
    json per_type = json::object();
    for (const auto& [type, s] : c.per_type) {
        per_type[std::string(to_string(type))] = {
            {"attempted", s.attempted},
            {"first_attempt_correct", s.first_attempt_correct},
            {"attempts", s.attempts},
            {"accuracy", s.attempted ? rational_to_json(Rational(s.first_attempt_correct, s.attempted)) : json(nullptr)}};
    }
    return {{"questions_attempted", c.questions_attempted},
            {"first_attempt_correct", c.first_attempt_correct},
            {"eventually_correct", c.eventually_correct},
            {"total_attempts", c.total_attempts},
            {"followups_attempted", c.followups_attempted},
            {"accuracy", optional_rational(c.accuracy())},
            {"eventual_accuracy", optional_rational(c.eventual_accuracy())},
            {"per_type", per_type}};
}

}  // namespace

json session_stats_to_json(const SessionStats& stats) {
    json doc = counts_to_json(stats.counts);
    doc["session_id"] = stats.session_id;
    doc["storybook_id"] = stats.storybook_id;
    doc["started_at"] = format_rfc3339(stats.started_at);
    json questions = json::array();
    for (const auto& q : stats.per_question) {
        json attempts = json::array();
        for (const auto& a : q.attempts) attempts.push_back({{"utterance", a.utterance}, {"verdict", to_string(a.verdict)}});
        questions.push_back({{"qa_id", q.qa_id},
                             {"question_text", q.question_text},
                             {"type", to_string(q.type)},
                             {"attempts", attempts},
                             {"canonical_answer", q.canonical_answer}});
    }
    doc["per_question"] = questions;
    return doc;
}

json weekly_stats_to_json(const WeeklyStats& stats) {
    json proportions = json::object();
    for (const auto& [type, r] : stats.type_proportions) proportions[std::string(to_string(type))] = rational_to_json(r);
    return {{"iso_week", {{"year", stats.iso_week.year}, {"week", stats.iso_week.week}}},
            {"sessions", stats.sessions},
            {"aggregate", counts_to_json(stats.aggregate)},
            {"type_proportions", proportions}};
}

}  // namespace storybuddy
