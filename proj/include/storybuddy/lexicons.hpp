#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace storybuddy {

/// An ordered list of lowercase words with O(1) membership.
class WordList {
public:
    WordList() = default;
    explicit WordList(std::vector<std::string> words);

    bool contains(std::string_view word) const;
    const std::vector<std::string>& words() const noexcept { return words_; }
    std::size_t size() const noexcept { return words_.size(); }

private:
    std::vector<std::string> words_;
    std::unordered_set<std::string> index_;
};

/// Every line-oriented data file the text pipeline depends on, loaded once at
/// startup from a directory.
struct Lexicons {
    WordList stopwords;           // stopwords.txt
    WordList emotions;            // emotions.txt
    WordList place_prepositions;  // place_prepositions.txt
    std::map<std::string, std::string, std::less<>> past_to_base;  // past_tense_verbs.txt
    std::vector<std::string> causal_connectives;  // connectives.txt, "causal <word>"
    std::vector<std::string> outcome_markers;     // connectives.txt, "outcome <phrase>"
    std::vector<std::string> answer_templates;    // answer_templates.txt, "{answer}" placeholder

    static Lexicons load(const std::filesystem::path& dir);

    // Directory baked in at build time; overridable with SB_DATA_DIR.
    static std::filesystem::path default_dir();
};

// Reads a UTF-8 data file: one entry per line, blank lines and lines starting
// with '#' skipped, trailing whitespace trimmed.
std::vector<std::string> read_lines(const std::filesystem::path& file);

}  // namespace storybuddy
