#include "storybuddy/answer_matcher.hpp"

#include "storybuddy/error.hpp"
#include "storybuddy/text.hpp"

#include <algorithm>
#include <array>

namespace storybuddy {

namespace {

constexpr std::array<std::string_view, 21> kUnits = {
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

constexpr std::array<std::string_view, 8> kTens = {"twenty", "thirty", "forty", "fifty",
                                                   "sixty",  "seventy", "eighty", "ninety"};

std::optional<int> unit_value(std::string_view word) {
    const auto it = std::find(kUnits.begin(), kUnits.end(), word);
    if (it == kUnits.end()) return std::nullopt;
    return static_cast<int>(it - kUnits.begin());
}

std::optional<int> tens_value(std::string_view word) {
    const auto it = std::find(kTens.begin(), kTens.end(), word);
    if (it == kTens.end()) return std::nullopt;
    return 20 + 10 * static_cast<int>(it - kTens.begin());
}

}  // namespace

std::string normalize_answer(std::string_view text) {
    const TokenList tokens = tokenize(text);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& t = tokens.tokens[i];
        if (const auto tens = tens_value(t); tens && i + 1 < tokens.size()) {
            const auto gap = text.substr(tokens.offsets[i].end, tokens.offsets[i + 1].begin - tokens.offsets[i].end);
            const auto unit = unit_value(tokens.tokens[i + 1]);
            if (gap == "-" && unit && *unit >= 1 && *unit <= 9) {
                words.push_back(std::to_string(*tens + *unit));
                ++i;
                continue;
            }
        }
        if (const auto unit = unit_value(t)) {
            words.push_back(std::to_string(*unit));
        } else if (const auto tens = tens_value(t)) {
            words.push_back(std::to_string(*tens));
        } else {
            words.push_back(t);
        }
    }
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    return out;
}

AnswerMatcher::AnswerMatcher(const Lexicons& lexicons)
    : templates_(lexicons.answer_templates), stopwords_(lexicons.stopwords) {}

std::set<std::string> AnswerMatcher::proliferate_templates(std::string_view canonical_answer) const {
    const std::string answer = normalize_answer(canonical_answer);
    if (answer.empty()) throw ValidationError("canonical answer is empty");
    std::set<std::string> out;
    for (const auto& t : templates_) {
        std::string phrase = t;
        const auto at = phrase.find("{answer}");
        phrase.replace(at, std::string_view("{answer}").size(), answer);
        // Templates are authored in normalized form already, apart from spacing.
        out.insert(normalize_answer(phrase));
    }
    return out;
}

AnswerKey AnswerMatcher::make_key(std::string qa_id, std::string_view canonical_answer) const {
    AnswerKey key;
    key.qa_id = std::move(qa_id);
    key.canonical_answer = std::string(canonical_answer);
    key.accepted_phrases = proliferate_templates(canonical_answer);
    key.canonical_content = content_tokens(normalize_answer(canonical_answer), stopwords_);
    return key;
}

MatchVerdict AnswerMatcher::judge(std::string_view utterance, const AnswerKey& key) const {
    MatchVerdict v;
    v.normalized_input = normalize_answer(utterance);
    if (v.normalized_input.empty()) return v;

    if (key.accepted_phrases.count(v.normalized_input) != 0) {
        v.verdict = MatchResult::Correct;
        v.matched_phrase = v.normalized_input;
        return v;
    }
    if (!key.canonical_content.empty()) {
        const auto said = content_tokens(v.normalized_input, stopwords_);
        if (std::includes(said.begin(), said.end(), key.canonical_content.begin(), key.canonical_content.end())) {
            v.verdict = MatchResult::Correct;
            v.matched_phrase = normalize_answer(key.canonical_answer);
        }
    }
    return v;
}

}  // namespace storybuddy
