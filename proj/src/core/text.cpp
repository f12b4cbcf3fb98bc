#include "storybuddy/text.hpp"

#include "storybuddy/lexicons.hpp"

#include <cstdint>

namespace storybuddy {

namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at `pos`; malformed sequences yield kInvalid with
// length 1 so that callers always make progress.
char32_t decode(std::string_view s, std::size_t pos, std::size_t& len) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) {
        len = 1;
        return b0;
    }
    std::size_t need = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        need = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        need = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        need = 3;
        cp = b0 & 0x07;
    } else {
        len = 1;
        return kInvalid;
    }
    for (std::size_t i = 1; i <= need; ++i) {
        if (pos + i >= s.size()) {
            len = 1;
            return kInvalid;
        }
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) {
            len = 1;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong forms and surrogates.
    if ((need == 1 && cp < 0x80) || (need == 2 && cp < 0x800) || (need == 3 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        len = 1;
        return kInvalid;
    }
    len = need + 1;
    return cp;
}

void encode(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// ASCII letters and digits plus the Latin-1 / Latin Extended-A letter blocks.
bool is_word_char(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    return cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x17F && cp % 2 == 0) return cp + 1;
    return cp;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

}  // namespace

TokenList tokenize(std::string_view text) {
    TokenList out;
    std::string current;
    std::size_t start = 0;
    std::size_t last_end = 0;

    auto flush = [&] {
        if (!current.empty()) {
            out.tokens.push_back(std::move(current));
            out.offsets.push_back({start, last_end});
            current.clear();
        }
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        const char32_t cp = decode(text, pos, len);
        if (is_word_char(cp)) {
            if (current.empty()) start = pos;
            encode(to_lower(cp), current);
            last_end = pos + len;
        } else if (is_apostrophe(cp) && !current.empty() && pos + len < text.size()) {
            std::size_t next_len = 0;
            const char32_t next = decode(text, pos + len, next_len);
            if (is_word_char(next)) {
                current += '\'';
            } else {
                flush();
            }
        } else {
            flush();
        }
        pos += len;
    }
    flush();
    return out;
}

TokenList remove_stopwords(const TokenList& tokens, const WordList& stopwords) {
    TokenList out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!stopwords.contains(tokens.tokens[i])) {
            out.tokens.push_back(tokens.tokens[i]);
            out.offsets.push_back(tokens.offsets[i]);
        }
    }
    return out;
}

std::set<std::string> content_tokens(std::string_view text, const WordList& stopwords) {
    const TokenList kept = remove_stopwords(tokenize(text), stopwords);
    return {kept.tokens.begin(), kept.tokens.end()};
}

std::string normalize_spacing(std::string_view text) {
    std::string out;
    for (const auto& token : tokenize(text).tokens) {
        if (!out.empty()) out += ' ';
        out += token;
    }
    return out;
}

std::vector<TextSpan> split_sentences(std::string_view text) {
    std::vector<TextSpan> out;
    auto push_trimmed = [&](std::size_t b, std::size_t e) {
        while (b < e && is_space(text[b])) ++b;
        while (e > b && is_space(text[e - 1])) --e;
        if (b < e) out.push_back({b, e});
    };

    std::size_t sentence_start = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c != '.' && c != '!' && c != '?') {
            ++pos;
            continue;
        }
        std::size_t end = pos;
        while (end < text.size() && (text[end] == '.' || text[end] == '!' || text[end] == '?')) ++end;
        // Closing quotes and brackets stay with the sentence they close.
        while (end < text.size()) {
            if (text[end] == '"' || text[end] == '\'' || text[end] == ')') {
                ++end;
            } else if (text.substr(end, 3) == "\xE2\x80\x9D" || text.substr(end, 3) == "\xE2\x80\x99") {
                end += 3;
            } else {
                break;
            }
        }
        if (end == text.size() || is_space(text[end])) {
            push_trimmed(sentence_start, end);
            sentence_start = end;
        }
        pos = end;
    }
    push_trimmed(sentence_start, text.size());
    return out;
}

bool is_valid_utf8(std::string_view text, std::size_t* bad_offset) {
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        if (decode(text, pos, len) == kInvalid) {
            if (bad_offset != nullptr) *bad_offset = pos;
            return false;
        }
        pos += len;
    }
    return true;
}

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
    }
    return out;
}

std::vector<std::size_t> find_whole_word(std::string_view haystack, std::string_view needle) {
    std::vector<std::size_t> hits;
    if (needle.empty() || needle.size() > haystack.size()) return hits;
    const std::string hay = ascii_lower(haystack);
    const std::string pat = ascii_lower(needle);
    std::size_t pos = hay.find(pat);
    while (pos != std::string::npos) {
        const bool left_ok = pos == 0 || !is_ascii_alnum(hay[pos - 1]);
        const std::size_t after = pos + pat.size();
        const bool right_ok = after >= hay.size() || !is_ascii_alnum(hay[after]);
        if (left_ok && right_ok) hits.push_back(pos);
        pos = hay.find(pat, pos + 1);
    }
    return hits;
}

}  // namespace storybuddy
