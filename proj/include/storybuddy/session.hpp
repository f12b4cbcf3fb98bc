#pragma once

#include "storybuddy/answer_matcher.hpp"
#include "storybuddy/followup.hpp"
#include "storybuddy/qag.hpp"
#include "storybuddy/storybook.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace storybuddy {

using Timestamp = std::chrono::sys_seconds;

std::string format_rfc3339(Timestamp t);
// Accepts "YYYY-MM-DDTHH:MM:SS" with optional fraction and "Z" or "+hh:mm".
Timestamp parse_rfc3339(std::string_view text);

inline constexpr std::string_view kGreeting = "Hi! I'm StoryBuddy. Let's read a story together!";
inline constexpr std::string_view kClosing = "The end! Great reading today!";
inline constexpr std::string_view kQuestionIntro = "OK, here is a question";
inline constexpr std::string_view kPraise = "You are correct! Good job!";
inline constexpr std::string_view kNotQuite = "That's not quite right.";
inline constexpr int kMaxIncorrectAttempts = 3;

enum class SessionMode { CoReading, BotReading };
enum class Phase { Greeting, Reading, AwaitingAnswer, Feedback, Finished };
enum class ChildOption { MoveToNextPage, TryAnotherQuestion, TryAgain };
enum class Verdict { Correct, Incorrect, ParentCorrect, ParentIncorrect };

std::string_view to_string(SessionMode mode);
std::string_view to_string(Phase phase);
std::string_view to_string(ChildOption option);
std::string_view to_string(Verdict verdict);
std::optional<SessionMode> parse_session_mode(std::string_view name);
std::optional<ChildOption> parse_child_option(std::string_view name);
std::optional<Verdict> parse_verdict(std::string_view name);

inline bool is_correct(Verdict v) { return v == Verdict::Correct || v == Verdict::ParentCorrect; }

struct AttemptRecord {
    std::string qa_id;
    QuestionType question_type = QuestionType::Action;
    std::string utterance;
    Verdict verdict = Verdict::Incorrect;
    int attempt_number = 1;
    Timestamp timestamp;
    bool is_followup = false;

    friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

namespace event {
struct AgentUtterance {
    std::string text;
    std::optional<std::string> qa_id;  // set when the utterance asks a question
    friend bool operator==(const AgentUtterance&, const AgentUtterance&) = default;
};
struct ChildUtterance {
    std::string text;
    friend bool operator==(const ChildUtterance&, const ChildUtterance&) = default;
};
struct OptionsShown {
    std::vector<ChildOption> options;
    friend bool operator==(const OptionsShown&, const OptionsShown&) = default;
};
struct OptionChosen {
    ChildOption option = ChildOption::MoveToNextPage;
    friend bool operator==(const OptionChosen&, const OptionChosen&) = default;
};
struct PageTurn {
    int to_index = 1;
    friend bool operator==(const PageTurn&, const PageTurn&) = default;
};
struct Attempt {
    AttemptRecord record;
    friend bool operator==(const Attempt&, const Attempt&) = default;
};
}  // namespace event

using EventBody = std::variant<event::AgentUtterance, event::ChildUtterance, event::OptionsShown,
                               event::OptionChosen, event::PageTurn, event::Attempt>;

struct Event {
    Timestamp at;
    EventBody body;
    friend bool operator==(const Event&, const Event&) = default;
};

/// Everything a session needs to run, snapshotted at creation so the
/// transcript stays interpretable after later edits to the library or config.
struct SessionCatalog {
    Storybook storybook;
    std::vector<QAPair> questions;               // ranked, per page
    std::vector<AnchorSet> anchors;              // one per page that has questions
    std::map<int, std::vector<std::string>> plan;  // page -> selected question ids in ask order

    const QAPair* find(std::string_view qa_id) const;
    const AnchorSet* anchors_for(int page_index) const;
    bool is_followup(const QAPair& qa) const;

    // Throws ValidationError when the plan names unknown pages or questions.
    void validate() const;
};

struct SessionState {
    std::string session_id;
    std::string storybook_id;
    SessionMode mode = SessionMode::BotReading;
    int current_page = 1;
    Phase phase = Phase::Greeting;
    std::optional<std::string> active_qa;
    std::set<std::string> asked;  // questions asked, judged, or released as follow-ups
    std::map<int, std::vector<std::string>> selected_plan;
    Timestamp started_at;
    std::vector<ChildOption> offered;  // options of the last OptionsShown, until one is chosen
    std::map<std::string, int> attempts;
    std::map<std::string, int> incorrect;

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

/// Result of one automaton transition.
struct Transition {
    SessionState state;
    std::vector<Event> events;
    std::vector<std::string> utterances;
    std::vector<ChildOption> options;
    std::optional<Verdict> verdict;
    std::optional<QAPair> followup;
};

/// The dialogue automaton. Every operation is a pure function of the current
/// state and its input; nothing here performs I/O.
class SessionEngine {
public:
    SessionEngine(std::shared_ptr<const SessionCatalog> catalog, std::shared_ptr<const AnswerMatcher> matcher);

    const SessionCatalog& catalog() const noexcept { return *catalog_; }

    SessionState initial_state(std::string session_id, SessionMode mode, Timestamp started_at) const;

    // Greeting -> Reading. BotReading utters the greeting and page 1.
    Transition start(const SessionState& s, Timestamp now) const;
    // Asks the next unasked planned question on the current page, or offers
    // MoveToNextPage when none remains.
    Transition bot_ask_next(const SessionState& s, Timestamp now) const;
    // CoReading only: hands a specific question to the chatbot panel.
    Transition ask_question(const SessionState& s, const std::string& qa_id, Timestamp now) const;
    Transition submit_child_answer(const SessionState& s, const std::string& utterance, Timestamp now) const;
    Transition parent_judge(const SessionState& s, const std::string& qa_id, bool correct, Timestamp now) const;
    Transition choose_option(const SessionState& s, ChildOption option, Timestamp now) const;
    // CoReading only: left/right navigation.
    Transition turn_page(const SessionState& s, int to_index, Timestamp now) const;
    // CoReading only: the parent closes the book.
    Transition end_session(const SessionState& s, Timestamp now) const;

    std::vector<std::string> remaining_on_page(const SessionState& s) const;

private:
    Transition ask(const SessionState& s, const QAPair& qa, Timestamp now) const;
    std::vector<ChildOption> feedback_options(const SessionState& s, bool correct, const std::string& qa_id) const;

    std::shared_ptr<const SessionCatalog> catalog_;
    std::shared_ptr<const AnswerMatcher> matcher_;
    std::map<std::string, AnswerKey, std::less<>> keys_;
};

struct SessionTranscript {
    std::string session_id;
    SessionMode mode = SessionMode::BotReading;
    Timestamp started_at;
    std::shared_ptr<const SessionCatalog> catalog;
    std::vector<Event> events;

    const std::string& storybook_id() const { return catalog->storybook.id; }
};

/// A live session: the current state plus its append-only transcript.
class Session {
public:
    // Runs start(); throws ValidationError for an empty book or a bad plan.
    static Session start(std::shared_ptr<const SessionCatalog> catalog, std::shared_ptr<const AnswerMatcher> matcher,
                         std::string session_id, SessionMode mode, Timestamp now);

    // Rebuilds a live session from a persisted transcript; throws CorruptionError.
    static Session resume(SessionTranscript transcript, std::shared_ptr<const AnswerMatcher> matcher);

    const SessionState& state() const noexcept { return state_; }
    const SessionTranscript& transcript() const noexcept { return transcript_; }
    const SessionEngine& engine() const noexcept { return engine_; }

    // Appends the transition's events and adopts its state.
    const Transition& apply(Transition t);

    // Steps the bot forward while it can act without input: after start and
    // after each page turn it asks the next question.
    std::vector<Transition> auto_advance(Timestamp now);

private:
    Session(SessionEngine engine, SessionTranscript transcript, SessionState state);

    SessionEngine engine_;
    SessionTranscript transcript_;
    SessionState state_;
    Transition last_;
};

/// Re-drives the automaton from the transcript's recorded inputs and checks
/// that every recorded output matches. Throws CorruptionError naming the first
/// offending event.
SessionState replay(const SessionTranscript& transcript, std::shared_ptr<const AnswerMatcher> matcher);

nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& doc);
nlohmann::json transcript_to_json(const SessionTranscript& t);
SessionTranscript transcript_from_json(const nlohmann::json& doc);
nlohmann::json session_state_to_json(const SessionState& s);
nlohmann::json attempt_to_json(const AttemptRecord& r);

}  // namespace storybuddy
