#pragma once

#include "storybuddy/lexicons.hpp"
#include "storybuddy/question_type.hpp"
#include "storybuddy/rational.hpp"
#include "storybuddy/storybook.hpp"
#include "storybuddy/text.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace storybuddy {

/// Byte range into the text of page `page_index`.
struct AnswerSpan {
    int page_index = 0;
    std::size_t begin = 0;
    std::size_t end = 0;

    friend bool operator==(const AnswerSpan&, const AnswerSpan&) = default;
};

/// An answer located in the story before any question is phrased for it.
/// `clause` and `context` carry the text the question template needs.
struct AnswerCandidate {
    int page_index = 0;
    AnswerSpan span;  // for Prediction, points into the following page
    std::string answer_text;
    QuestionType type = QuestionType::Action;
    std::optional<std::string> focus_entity;
    std::string rule;  // "R1".."R7"
    std::string clause;
    std::string context;
    std::size_t sentence_begin = 0;

    friend bool operator==(const AnswerCandidate&, const AnswerCandidate&) = default;
};

enum class QASource { RuleBased, Remote, ParentEdited };

std::string_view to_string(QASource source);
std::optional<QASource> parse_qa_source(std::string_view name);

struct QAPair {
    std::string id;
    int page_index = 0;
    std::string question_text;
    std::string answer_text;
    QuestionType type = QuestionType::Action;
    Rational rank_score;
    QASource source = QASource::RuleBased;
    std::optional<std::string> focus_entity;
    std::optional<AnswerSpan> answer_span;

    friend bool operator==(const QAPair&, const QAPair&) = default;
};

nlohmann::json qa_pair_to_json(const QAPair& qa);
QAPair qa_pair_from_json(const nlohmann::json& doc);
nlohmann::json rational_to_json(const Rational& r);
Rational rational_from_json(const nlohmann::json& doc);

// Checks the QAPair invariants (question ends with '?', non-empty answer).
bool is_well_formed(const QAPair& qa);

// --- answer generation -----------------------------------------------------

/// Runs the per-type extraction rules over every sentence of `page`.
/// `next_page` is the following page, or null on the last page (no
/// Prediction candidate is produced then).
std::vector<AnswerCandidate> extract_answer_candidates(const Page& page, const Page* next_page,
                                                       const Lexicons& lexicons);

// --- question generation ---------------------------------------------------

/// One QAPair per candidate, phrased by the candidate type's template. Ids are
/// "p<page>-<n>" in candidate order; rank_score is left at zero.
std::vector<QAPair> generate_questions(const Page& page, const std::vector<AnswerCandidate>& candidates,
                                       const Lexicons& lexicons);

// Turns a declarative clause into question word order: "Goldilocks ate the
// porridge" -> "did Goldilocks eat the porridge", "Baby Bear was sad" -> "was
// Baby Bear sad". Exposed for testing.
std::string do_support(const std::string& clause, const std::vector<std::string>& characters,
                       const Lexicons& lexicons);

QuestionType classify_question_type(std::string_view question_text, const Lexicons& lexicons);

// --- ranking ---------------------------------------------------------------

// Case-insensitive whole-word occurrences of `entity` across every page.
int entity_frequency(const Storybook& book, std::string_view entity);

Rational score_question(const QAPair& qa, const Storybook& book, const Lexicons& lexicons);

/// Drops pairs whose type is not enabled, scores the rest and sorts them by
/// score descending, then answer position on the page, then question text.
std::vector<QAPair> rank_questions(std::vector<QAPair> pairs, const TypeSet& enabled, const Storybook& book,
                                   const Lexicons& lexicons);

// Sorts already-scored pairs with the ranking tie-breaks.
void sort_by_rank(std::vector<QAPair>& pairs);

// --- remote generator contract ---------------------------------------------

struct GenerationRequest {
    std::string page_text;
    TypeSet enabled_types;
    int max_count = 10;
};

struct GenerationItem {
    std::string question_text;
    std::string answer_text;
    std::string type;
    double score = 0.0;
};

using GenerationResponse = std::vector<GenerationItem>;

nlohmann::json generation_request_to_json(const GenerationRequest& request);

/// Parses a response body. Items that are not objects with the four fields
/// are dropped; a body that is not a JSON array throws RemoteError.
GenerationResponse parse_generation_response(std::string_view body);

class QuestionGenerator {
public:
    virtual ~QuestionGenerator() = default;
    // Throws RemoteError on timeout or protocol failure.
    virtual GenerationResponse generate(const GenerationRequest& request) const = 0;
};

struct GenerationResult {
    std::vector<QAPair> pairs;
    bool fell_back = false;
    std::string fallback_reason;
};

/// extract -> generate -> rank for one page. With a remote generator, its items
/// are validated one by one, then ranked exactly like rule-based output; any
/// RemoteError falls back to the rule pipeline and sets `fell_back`.
GenerationResult generate_for_page(const Storybook& book, int page_index, const TypeSet& enabled,
                                   const Lexicons& lexicons, const QuestionGenerator* remote = nullptr);

}  // namespace storybuddy
