#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace storybuddy {

class WordList;

/// Half-open byte range into a source string.
struct TextSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

/// Lowercase tokens in source order, each with the byte span it came from.
struct TokenList {
    std::vector<std::string> tokens;
    std::vector<TextSpan> offsets;

    std::size_t size() const noexcept { return tokens.size(); }
    bool empty() const noexcept { return tokens.empty(); }
    friend bool operator==(const TokenList&, const TokenList&) = default;
};

// Splits on every character that is not a letter, digit, or an apostrophe
// standing between two letters/digits. Tokens are lowercased; a typographic
// apostrophe (U+2019) inside a word is folded to ASCII '.
TokenList tokenize(std::string_view text);

TokenList remove_stopwords(const TokenList& tokens, const WordList& stopwords);

// Distinct tokens left after stopword removal.
std::set<std::string> content_tokens(std::string_view text, const WordList& stopwords);

// Tokens joined by single spaces: lowercase, punctuation stripped.
std::string normalize_spacing(std::string_view text);

// Sentence spans. A sentence ends at a run of '.', '!' or '?' (plus any closing
// quotes or brackets) followed by whitespace or end of text. Spans are trimmed
// of surrounding whitespace; text with no terminator is a single sentence.
std::vector<TextSpan> split_sentences(std::string_view text);

// True when the text decodes as UTF-8.
bool is_valid_utf8(std::string_view text, std::size_t* bad_offset = nullptr);

// ASCII-only case folding, used for character-name matching.
std::string ascii_lower(std::string_view text);

// Case-insensitive search for `needle` bounded by non-alphanumeric characters.
// Returns every start offset.
std::vector<std::size_t> find_whole_word(std::string_view haystack, std::string_view needle);

}  // namespace storybuddy
