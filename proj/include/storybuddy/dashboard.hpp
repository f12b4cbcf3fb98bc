#pragma once

#include "storybuddy/rational.hpp"
#include "storybuddy/session.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace storybuddy {

struct TypeStats {
    int attempted = 0;
    int first_attempt_correct = 0;
    int attempts = 0;

    friend bool operator==(const TypeStats&, const TypeStats&) = default;
};

struct QuestionAttempt {
    std::string utterance;
    Verdict verdict = Verdict::Incorrect;

    friend bool operator==(const QuestionAttempt&, const QuestionAttempt&) = default;
};

struct QuestionDetail {
    std::string qa_id;
    std::string question_text;
    QuestionType type = QuestionType::Action;
    std::vector<QuestionAttempt> attempts;
    std::string canonical_answer;

    friend bool operator==(const QuestionDetail&, const QuestionDetail&) = default;
};

/// Counters shared by per-session and weekly statistics.
struct StatsCounts {
    int questions_attempted = 0;
    int first_attempt_correct = 0;
    int eventually_correct = 0;
    int total_attempts = 0;
    int followups_attempted = 0;
    std::map<QuestionType, TypeStats> per_type;  // only types with at least one attempt

    // first_attempt_correct / questions_attempted; empty when nothing was attempted.
    std::optional<Rational> accuracy() const;
    std::optional<Rational> eventual_accuracy() const;

    StatsCounts& operator+=(const StatsCounts& other);
    friend bool operator==(const StatsCounts&, const StatsCounts&) = default;
};

struct SessionStats {
    std::string session_id;
    std::string storybook_id;
    Timestamp started_at;
    StatsCounts counts;
    std::vector<QuestionDetail> per_question;  // in order of first attempt

    friend bool operator==(const SessionStats&, const SessionStats&) = default;
};

struct IsoWeek {
    int year = 0;
    int week = 0;

    friend bool operator==(const IsoWeek&, const IsoWeek&) = default;
    friend auto operator<=>(const IsoWeek&, const IsoWeek&) = default;
};

struct WeeklyStats {
    IsoWeek iso_week;
    std::vector<std::string> sessions;
    StatsCounts aggregate;
    std::map<QuestionType, Rational> type_proportions;

    friend bool operator==(const WeeklyStats&, const WeeklyStats&) = default;
};

// ISO-8601 week of the instant, seen from a fixed UTC offset.
IsoWeek iso_week_of(Timestamp t, int utc_offset_minutes = 0);
// Number of ISO weeks (52 or 53) in the given ISO year.
int iso_weeks_in_year(int year);
// Parses "YYYY-WW" or "YYYY-Www"; throws ValidationError.
IsoWeek parse_iso_week(std::string_view text);

// Replays the transcript first, so a corrupt transcript raises CorruptionError.
SessionStats compute_session_stats(const SessionTranscript& transcript, std::shared_ptr<const AnswerMatcher> matcher);
// Counts only; assumes the transcript has already been validated.
SessionStats tally_session(const SessionTranscript& transcript);

// Throws ValidationError when a session did not start inside the week.
WeeklyStats aggregate_weekly(const std::vector<SessionStats>& stats, IsoWeek week, int utc_offset_minutes = 0);

SessionStats filter_by_type(const SessionStats& stats, QuestionType type);
WeeklyStats filter_by_type(const WeeklyStats& stats, QuestionType type);

nlohmann::json session_stats_to_json(const SessionStats& stats);
nlohmann::json weekly_stats_to_json(const WeeklyStats& stats);

}  // namespace storybuddy
