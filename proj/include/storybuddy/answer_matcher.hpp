#pragma once

#include "storybuddy/lexicons.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace storybuddy {

// Lowercases, strips punctuation, collapses whitespace, and rewrites number
// words to digits: "zero".."twenty", the tens "thirty".."ninety", and
// hyphenated compounds such as "twenty-one". Idempotent.
std::string normalize_answer(std::string_view text);

struct AnswerKey {
    std::string qa_id;
    std::string canonical_answer;
    std::set<std::string> accepted_phrases;
    std::set<std::string> canonical_content;  // normalized canonical tokens minus stopwords
};

enum class MatchResult { Correct, Incorrect };

struct MatchVerdict {
    MatchResult verdict = MatchResult::Incorrect;
    std::optional<std::string> matched_phrase;
    std::string normalized_input;

    bool correct() const noexcept { return verdict == MatchResult::Correct; }
};

/// Builds answer keys by wrapping a canonical answer in filler templates, and
/// judges transcribed utterances against them.
class AnswerMatcher {
public:
    explicit AnswerMatcher(const Lexicons& lexicons);

    // Throws ValidationError when the answer normalizes to nothing.
    std::set<std::string> proliferate_templates(std::string_view canonical_answer) const;

    AnswerKey make_key(std::string qa_id, std::string_view canonical_answer) const;

    // Correct when the normalized utterance is an accepted phrase, or when every
    // content token of the canonical answer occurs in the utterance.
    MatchVerdict judge(std::string_view utterance, const AnswerKey& key) const;

    const std::vector<std::string>& templates() const noexcept { return templates_; }

private:
    std::vector<std::string> templates_;
    WordList stopwords_;
};

}  // namespace storybuddy
