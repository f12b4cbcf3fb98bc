#include "storybuddy/dashboard.hpp"

#include "storybuddy/error.hpp"
#include "session_fixture.hpp"

#include <gtest/gtest.h>

namespace sb = storybuddy;
using sbtest::at;
using sbtest::t0;

namespace {

struct Judgement {
    int page;
    std::string qa;
    bool correct;
};

// Co-reading session judged entirely by the parent; page turns are inserted as needed.
sb::SessionTranscript judged(const std::string& id, sb::Timestamp start, const std::vector<Judgement>& script) {
    auto s = sb::Session::start(sbtest::small_catalog(), sbtest::shared_matcher(), id, sb::SessionMode::CoReading, start);
    int clock = 1;
    for (const auto& j : script) {
        if (s.state().current_page != j.page) {
            s.apply(s.engine().turn_page(s.state(), j.page, start + std::chrono::seconds(clock++)));
        }
        s.apply(s.engine().parent_judge(s.state(), j.qa, j.correct, start + std::chrono::seconds(clock++)));
    }
    return s.transcript();
}

TEST(SessionStats, ThreeOfFourFirstAttempts) {
    const auto tr = judged("a", t0(), {{1, "p1-1", true}, {1, "p1-2", false}, {1, "p1-2", true},
                                       {2, "p2-1", true}, {3, "p3-1", true}});
    const auto st = sb::compute_session_stats(tr, sbtest::shared_matcher());
    EXPECT_EQ(st.counts.questions_attempted, 4);
    EXPECT_EQ(st.counts.accuracy(), sb::Rational(3, 4));
    EXPECT_EQ(st.counts.eventual_accuracy(), sb::Rational(1));
    EXPECT_EQ(st.counts.total_attempts, 5);
    EXPECT_EQ(st.counts.followups_attempted, 1);
    EXPECT_EQ(sb::session_stats_to_json(st)["accuracy"], sb::rational_to_json(sb::Rational(3, 4)));
}

TEST(SessionStats, IncorrectThenCorrectCountsAsFirstMiss) {
    const auto st = sb::tally_session(judged("a", t0(), {{1, "p1-1", false}, {1, "p1-1", true}}));
    EXPECT_EQ(st.counts.accuracy(), sb::Rational(0));
    EXPECT_EQ(st.counts.eventually_correct, 1);
    ASSERT_EQ(st.per_question.size(), 1u);
    EXPECT_EQ(st.per_question[0].attempts.size(), 2u);
    EXPECT_EQ(st.per_question[0].canonical_answer, "Goldilocks");
}

TEST(SessionStats, NothingAttemptedIsNull) {
    const auto st = sb::tally_session(judged("a", t0(), {}));
    EXPECT_FALSE(st.counts.accuracy());
    EXPECT_TRUE(sb::session_stats_to_json(st)["accuracy"].is_null());
}

TEST(SessionStats, ChildAnswersCounted) {
    auto s = sb::Session::start(sbtest::small_catalog(), sbtest::shared_matcher(), "b", sb::SessionMode::BotReading, t0());
    s.auto_advance(t0());
    s.apply(s.engine().submit_child_answer(s.state(), "the bears", at(1)));
    s.apply(s.engine().choose_option(s.state(), sb::ChildOption::TryAgain, at(2)));
    s.apply(s.engine().submit_child_answer(s.state(), "goldilocks", at(3)));
    const auto st = sb::compute_session_stats(s.transcript(), sbtest::shared_matcher());
    EXPECT_EQ(st.per_question.at(0).attempts,
              (std::vector<sb::QuestionAttempt>{{"the bears", sb::Verdict::Incorrect}, {"goldilocks", sb::Verdict::Correct}}));
}

TEST(SessionStats, CorruptTranscriptRejected) {
    auto tr = judged("a", t0(), {{1, "p1-1", true}});
    std::get<sb::event::Attempt>(tr.events.back().body).record.attempt_number = 5;
    EXPECT_THROW(sb::compute_session_stats(tr, sbtest::shared_matcher()), sb::CorruptionError);
}

TEST(Weekly, PooledAccuracyAndProportions) {
    const auto a = sb::tally_session(judged("a", t0(), {{1, "p1-1", true}, {1, "p1-2", false}, {2, "p2-1", true},
                                                          {3, "p3-1", true}}));
    const auto b = sb::tally_session(judged("b", at(86400), {{1, "p1-1", false}, {1, "p1-2", true}, {3, "p3-1", true},
                                                               {3, "p3-2", false}}));
    const auto w = sb::aggregate_weekly({a, b}, {2026, 2});
    EXPECT_EQ(w.aggregate.accuracy(), sb::Rational(5, 8));
    EXPECT_EQ(w.sessions, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(w.type_proportions.at(sb::QuestionType::Character), sb::Rational(1, 4));
    sb::Rational total(0);
    for (const auto& [type, p] : w.type_proportions) total = total + p;
    EXPECT_EQ(total, sb::Rational(1));

    const auto only = sb::filter_by_type(w, sb::QuestionType::Setting);
    EXPECT_EQ(only.aggregate.questions_attempted, 2);
    EXPECT_EQ(only.aggregate.accuracy(), sb::Rational(1));
}

TEST(Weekly, HalfAndHalfProportions) {
    const auto a = sb::tally_session(judged("a", t0(), {{1, "p1-1", true}, {3, "p3-1", false}}));
    const auto w = sb::aggregate_weekly({a}, {2026, 2});
    EXPECT_EQ(w.type_proportions.at(sb::QuestionType::Character), sb::Rational(1, 2));
    EXPECT_EQ(w.type_proportions.at(sb::QuestionType::Setting), sb::Rational(1, 2));
}

TEST(Weekly, EmptyWeek) {
    const auto w = sb::aggregate_weekly({}, {2026, 3});
    EXPECT_TRUE(w.sessions.empty());
    EXPECT_FALSE(w.aggregate.accuracy());
    EXPECT_TRUE(w.type_proportions.empty());
    EXPECT_TRUE(sb::weekly_stats_to_json(w)["accuracy"].is_null());
}

TEST(Weekly, RejectsSessionOutsideWeek) {
    const auto a = sb::tally_session(judged("a", t0(), {}));
    EXPECT_THROW(sb::aggregate_weekly({a}, {2026, 3}), sb::ValidationError);
}

TEST(Weekly, SumsMatchPerSessionCounts) {
    std::mt19937_64 rng(5);
    const std::vector<std::pair<int, std::string>> pool = {{1, "p1-1"}, {1, "p1-2"}, {2, "p2-1"}, {3, "p3-1"}, {3, "p3-2"}};
    for (int round = 0; round < 50; ++round) {
        std::vector<sb::SessionStats> all;
        int attempted = 0;
        int first = 0;
        for (int s = 0; s < 3; ++s) {
            std::vector<Judgement> script;
            std::set<std::string> seen;
            for (const auto& [page, id] : pool) {
                for (int k = static_cast<int>(rng() % 3); k > 0; --k) {
                    const bool ok = rng() % 2 == 0;
                    if (seen.insert(id).second) {
                        ++attempted;
                        first += ok ? 1 : 0;
                    }
                    script.push_back({page, id, ok});
                }
            }
            all.push_back(sb::tally_session(judged("s" + std::to_string(s), at(s * 60), script)));
        }
        const auto w = sb::aggregate_weekly(all, {2026, 2});
        EXPECT_EQ(w.aggregate.questions_attempted, attempted);
        EXPECT_EQ(w.aggregate.first_attempt_correct, first);
        if (attempted > 0) {
            EXPECT_EQ(w.aggregate.accuracy(), sb::Rational(first, attempted));
        }
    }
}

// Ordinal-date formula, independent of the library's implementation.
sb::IsoWeek oracle_week(std::chrono::sys_days day) {
    using namespace std::chrono;
    const year_month_day ymd(day);
    const int ordinal = (day - sys_days(ymd.year() / January / 1)).count() + 1;
    const int dow = static_cast<int>(std::chrono::weekday(day).iso_encoding());
    int y = static_cast<int>(ymd.year());
    int w = (ordinal - dow + 10) / 7;
    auto weeks_in = [](int yr) {
        const auto jan1 = static_cast<int>(std::chrono::weekday(sys_days(year(yr) / January / 1)).iso_encoding());
        const bool leap = year(yr).is_leap();
        return (jan1 == 4 || (leap && jan1 == 3)) ? 53 : 52;
    };
    if (w < 1) {
        --y;
        w = weeks_in(y);
    } else if (w > weeks_in(y)) {
        ++y;
        w = 1;
    }
    return {y, w};
}

TEST(IsoWeek, KnownDates) {
    EXPECT_EQ(sb::iso_week_of(t0()), (sb::IsoWeek{2026, 2}));
    EXPECT_EQ(sb::iso_week_of(sb::parse_rfc3339("2021-01-03T12:00:00Z")), (sb::IsoWeek{2020, 53}));
    EXPECT_EQ(sb::iso_week_of(sb::parse_rfc3339("2024-12-30T00:00:00Z")), (sb::IsoWeek{2025, 1}));
    EXPECT_EQ(sb::iso_weeks_in_year(2020), 53);
    EXPECT_EQ(sb::iso_weeks_in_year(2025), 52);
    EXPECT_EQ(sb::iso_weeks_in_year(2026), 53);
}

TEST(IsoWeek, OffsetMovesBoundary) {
    const auto sunday_late = sb::parse_rfc3339("2026-01-04T23:30:00Z");
    EXPECT_EQ(sb::iso_week_of(sunday_late, 0), (sb::IsoWeek{2026, 1}));
    EXPECT_EQ(sb::iso_week_of(sunday_late, 60), (sb::IsoWeek{2026, 2}));
    EXPECT_EQ(sb::iso_week_of(t0(), -600), (sb::IsoWeek{2026, 1}));
}

TEST(IsoWeek, MatchesOrdinalFormulaOverTwentyYears) {
    using namespace std::chrono;
    for (sys_days d = sys_days(2015y / January / 1); d < sys_days(2036y / January / 1); d += days(1)) {
        ASSERT_EQ(sb::iso_week_of(sb::Timestamp(d) + hours(12)), oracle_week(d)) << sb::format_rfc3339(sb::Timestamp(d));
    }
}

TEST(IsoWeek, Parse) {
    EXPECT_EQ(sb::parse_iso_week("2026-02"), (sb::IsoWeek{2026, 2}));
    EXPECT_EQ(sb::parse_iso_week("2020-W53"), (sb::IsoWeek{2020, 53}));
    EXPECT_THROW(sb::parse_iso_week("2025-53"), sb::ValidationError);
    EXPECT_THROW(sb::parse_iso_week("2026-00"), sb::ValidationError);
    EXPECT_THROW(sb::parse_iso_week("26-01"), sb::ValidationError);
}

}  // namespace
