#include "storybuddy/lexicons.hpp"

#include "storybuddy/error.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef STORYBUDDY_DATA_DIR
#define STORYBUDDY_DATA_DIR "data"
#endif

namespace storybuddy {

WordList::WordList(std::vector<std::string> words) : words_(std::move(words)) {
    index_.insert(words_.begin(), words_.end());
}

bool WordList::contains(std::string_view word) const {
    return index_.find(std::string(word)) != index_.end();
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot open data file " + file.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

Lexicons Lexicons::load(const std::filesystem::path& dir) {
    Lexicons lex;
    lex.stopwords = WordList(read_lines(dir / "stopwords.txt"));
    lex.emotions = WordList(read_lines(dir / "emotions.txt"));
    lex.place_prepositions = WordList(read_lines(dir / "place_prepositions.txt"));

    for (const auto& line : read_lines(dir / "past_tense_verbs.txt")) {
        std::istringstream fields(line);
        std::string past;
        std::string base;
        if (!(fields >> past >> base)) throw Error("malformed verb entry: " + line);
        lex.past_to_base.emplace(past, base);
    }

    for (const auto& line : read_lines(dir / "connectives.txt")) {
        const auto space = line.find(' ');
        if (space == std::string::npos) throw Error("malformed connective entry: " + line);
        const std::string kind = line.substr(0, space);
        std::string phrase = line.substr(space + 1);
        if (kind == "causal") {
            lex.causal_connectives.push_back(std::move(phrase));
        } else if (kind == "outcome") {
            lex.outcome_markers.push_back(std::move(phrase));
        } else {
            throw Error("unknown connective kind: " + kind);
        }
    }

    lex.answer_templates = read_lines(dir / "answer_templates.txt");
    for (const auto& t : lex.answer_templates) {
        if (t.find("{answer}") == std::string::npos) throw Error("template lacks {answer}: " + t);
    }
    return lex;
}

std::filesystem::path Lexicons::default_dir() {
    if (const char* env = std::getenv("SB_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return STORYBUDDY_DATA_DIR;
}

}  // namespace storybuddy
