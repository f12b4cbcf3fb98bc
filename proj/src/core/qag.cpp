#include "storybuddy/qag.hpp"

#include "storybuddy/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace storybuddy {

namespace {

using nlohmann::json;

constexpr std::string_view kPredictionQuestion = "What do you think will happen next?";

// Words that end a prepositional object or a context clause.
const WordList& clause_breakers() {
    static const WordList words({"because", "since", "as", "so", "when", "while", "after", "before", "until", "but"});
    return words;
}

const WordList& context_openers() {
    static const WordList words({"when", "after", "before", "while"});
    return words;
}

// Dropped from the front of a clause: "so the bears went" -> "the bears went".
const WordList& leading_conjunctions() {
    static const WordList words({"so", "and", "but", "then"});
    return words;
}

const WordList& copulas() {
    static const WordList words({"was", "were", "is", "are", "am"});
    return words;
}

// Linking verbs that describe a state rather than an action.
const WordList& linking_verbs() {
    static const WordList words({"felt", "feel", "feels", "seemed", "seems", "looked", "looks", "became"});
    return words;
}

const WordList& auxiliaries() {
    static const WordList words({"was", "were", "is", "are", "am", "could", "would", "can", "will", "should",
                                 "must", "might", "may", "shall"});
    return words;
}

bool is_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Moves `end` left past trailing punctuation, closing quotes and whitespace.
std::size_t trim_trailing(std::string_view text, std::size_t begin, std::size_t end) {
    while (end > begin) {
        const char c = text[end - 1];
        if (is_space(c) || c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':' || c == '"' ||
            c == '\'' || c == ')') {
            --end;
        } else if (end - begin >= 3 && text.substr(end - 3, 2) == "\xE2\x80" &&
                   (text[end - 1] == '\x9D' || text[end - 1] == '\x99')) {
            end -= 3;
        } else {
            break;
        }
    }
    return end;
}

std::size_t trim_leading(std::string_view text, std::size_t begin, std::size_t end) {
    while (begin < end && is_space(text[begin])) ++begin;
    return begin;
}

struct Word {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string key;  // lowercase, edge punctuation removed
    bool clause_end = false;  // raw word ends with ',', ';' or ':'
    bool bare = false;        // raw word ends in a letter or digit
};

std::vector<Word> split_words(std::string_view text, std::size_t begin, std::size_t end) {
    std::vector<Word> words;
    std::size_t pos = begin;
    while (pos < end) {
        while (pos < end && is_space(text[pos])) ++pos;
        if (pos >= end) break;
        const std::size_t start = pos;
        while (pos < end && !is_space(text[pos])) ++pos;
        Word w;
        w.begin = start;
        w.end = pos;
        std::size_t kb = start;
        std::size_t ke = pos;
        while (kb < ke && !is_alnum(text[kb])) ++kb;
        while (ke > kb && !is_alnum(text[ke - 1])) --ke;
        w.key = ascii_lower(text.substr(kb, ke - kb));
        const char last = text[pos - 1];
        w.clause_end = last == ',' || last == ';' || last == ':';
        w.bare = is_alnum(last);
        words.push_back(std::move(w));
    }
    return words;
}

struct NameMatch {
    std::string name;  // declared spelling
    std::size_t begin = 0;
    std::size_t end = 0;
};

std::vector<std::string> by_length_desc(std::vector<std::string> names) {
    std::stable_sort(names.begin(), names.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    return names;
}

// A declared character that opens the text, followed by whitespace.
std::optional<NameMatch> character_at_start(std::string_view text, std::size_t begin, std::size_t end,
                                            const std::vector<std::string>& characters) {
    for (const auto& name : by_length_desc(characters)) {
        if (begin + name.size() >= end) continue;
        if (ascii_lower(text.substr(begin, name.size())) != ascii_lower(name)) continue;
        if (!is_space(text[begin + name.size()])) continue;
        return NameMatch{name, begin, begin + name.size()};
    }
    return std::nullopt;
}

// Earliest whole-word occurrence of any declared character in [begin, end).
std::optional<NameMatch> first_character(std::string_view text, std::size_t begin, std::size_t end,
                                         const std::vector<std::string>& characters) {
    std::optional<NameMatch> best;
    for (const auto& name : by_length_desc(characters)) {
        const auto hits = find_whole_word(text.substr(begin, end - begin), name);
        if (hits.empty()) continue;
        const std::size_t at = begin + hits.front();
        if (!best || at < best->begin) best = NameMatch{name, at, at + name.size()};
    }
    return best;
}

// Index of the first word of the clause containing word `i`: one past the last
// earlier word that ends with clause punctuation, skipping a leading conjunction.
std::size_t clause_start(const std::vector<Word>& words, std::size_t i) {
    std::size_t start = 0;
    for (std::size_t j = i; j-- > 0;) {
        if (words[j].clause_end) {
            start = j + 1;
            break;
        }
    }
    while (start < i && leading_conjunctions().contains(words[start].key)) ++start;
    return start;
}

bool has_content(std::string_view text, const Lexicons& lex) { return !content_tokens(text, lex.stopwords).empty(); }

std::string slice(std::string_view text, std::size_t begin, std::size_t end) {
    return std::string(text.substr(begin, end - begin));
}

// Lowercases the first word when it is a function word ("The porridge" ->
// "the porridge"); names keep their capitals.
std::string lower_first(const std::string& clause, const Lexicons& lex) {
    const auto space = clause.find(' ');
    const std::string first = clause.substr(0, space);
    if (!lex.stopwords.contains(ascii_lower(first))) return clause;
    return ascii_lower(first) + (space == std::string::npos ? "" : clause.substr(space));
}

struct SentenceContext {
    std::string_view text;
    std::size_t begin = 0;     // sentence start
    std::size_t body_end = 0;  // sentence end without terminal punctuation
    std::vector<Word> words;
};

AnswerCandidate make_candidate(const Page& page, const SentenceContext& s, QuestionType type, const char* rule,
                               std::size_t begin, std::size_t end) {
    AnswerCandidate c;
    c.page_index = page.index;
    c.span = {page.index, begin, end};
    c.answer_text = slice(s.text, begin, end);
    c.type = type;
    c.rule = rule;
    c.sentence_begin = s.begin;
    return c;
}

std::optional<AnswerCandidate> rule_character(const Page& page, const SentenceContext& s, const Lexicons& lex) {
    const auto name = character_at_start(s.text, s.begin, s.body_end, page.characters);
    if (!name) return std::nullopt;
    const std::size_t pred_begin = trim_leading(s.text, name->end, s.body_end);
    if (pred_begin >= s.body_end) return std::nullopt;
    AnswerCandidate c = make_candidate(page, s, QuestionType::Character, "R1", name->begin, name->end);
    if (!has_content(c.answer_text, lex)) return std::nullopt;
    c.focus_entity = name->name;
    std::size_t pred_end = s.body_end;
    for (const auto& word : s.words) {
        if (word.begin >= pred_begin && word.clause_end) {
            pred_end = trim_trailing(s.text, pred_begin, word.end);
            break;
        }
    }
    c.clause = slice(s.text, pred_begin, pred_end);
    return c;
}

std::optional<AnswerCandidate> rule_setting(const Page& page, const SentenceContext& s, const Lexicons& lex) {
    const auto& w = s.words;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!lex.place_prepositions.contains(w[i].key) || !w[i].bare) continue;
        const std::size_t cs = clause_start(w, i);
        if (i < cs + 2 || i + 1 >= w.size()) continue;
        std::size_t last = i;
        for (std::size_t k = i + 1; k < w.size(); ++k) {
            if (clause_breakers().contains(w[k].key)) break;
            last = k;
            if (w[k].clause_end) break;
        }
        if (last == i) continue;
        const std::size_t begin = w[i + 1].begin;
        const std::size_t end = trim_trailing(s.text, begin, w[last].end);
        if (end <= begin || !has_content(s.text.substr(begin, end - begin), lex)) continue;
        AnswerCandidate c = make_candidate(page, s, QuestionType::Setting, "R2", begin, end);
        c.clause = slice(s.text, w[cs].begin, trim_trailing(s.text, w[cs].begin, w[i - 1].end));
        return c;
    }
    return std::nullopt;
}

std::vector<AnswerCandidate> rule_feeling(const Page& page, const SentenceContext& s, const Lexicons& lex) {
    std::vector<AnswerCandidate> out;
    const auto who = first_character(s.text, s.begin, s.body_end, page.characters);
    if (!who) return out;
    const auto& w = s.words;
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (!lex.emotions.contains(w[k].key)) continue;
        // The surface emotion word without surrounding punctuation.
        std::size_t b = w[k].begin;
        while (b < w[k].end && !is_alnum(s.text[b])) ++b;
        std::size_t e = w[k].end;
        while (e > b && !is_alnum(s.text[e - 1])) --e;
        AnswerCandidate c = make_candidate(page, s, QuestionType::Feeling, "R3", b, e);
        c.focus_entity = who->name;
        if (w[k].bare && k + 1 < w.size() &&
            (context_openers().contains(w[k + 1].key) || lex.place_prepositions.contains(w[k + 1].key))) {
            c.context = slice(s.text, w[k + 1].begin, s.body_end);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::optional<AnswerCandidate> rule_causal(const Page& page, const SentenceContext& s, const Lexicons& lex) {
    const auto& w = s.words;
    for (std::size_t i = 1; i + 1 < w.size(); ++i) {
        const auto& connectives = lex.causal_connectives;
        if (std::find(connectives.begin(), connectives.end(), w[i].key) == connectives.end()) continue;
        if (w[i].key == "as") {
            // Only the comma-introduced reason clause: "..., as she was tired".
            if (!w[i - 1].clause_end) continue;
            if (i + 2 < w.size() && w[i + 1].key == "a" && w[i + 2].key == "result") continue;
        }
        const std::size_t cs = clause_start(w, i - 1);
        if (i < cs + 2) continue;
        const std::size_t begin = w[i].begin;
        const std::size_t end = trim_trailing(s.text, begin, s.body_end);
        if (end <= begin || !has_content(s.text.substr(begin, end - begin), lex)) continue;
        AnswerCandidate c = make_candidate(page, s, QuestionType::CausalRelationship, "R5", begin, end);
        c.clause = slice(s.text, w[cs].begin, trim_trailing(s.text, w[cs].begin, w[i - 1].end));
        return c;
    }
    return std::nullopt;
}

std::optional<AnswerCandidate> rule_outcome(const Page& page, const SentenceContext& s,
                                            const std::optional<SentenceContext>& previous, const Lexicons& lex) {
    const auto& w = s.words;
    for (const auto& marker : lex.outcome_markers) {
        const auto marker_words = split_words(marker, 0, marker.size());
        if (marker_words.size() == 1) {
            // "A, so B"
            for (std::size_t i = 1; i + 1 < w.size(); ++i) {
                if (w[i].key != marker || !w[i - 1].clause_end) continue;
                const std::size_t cs = clause_start(w, i - 1);
                if (i < cs + 2) continue;
                const std::size_t begin = w[i + 1].begin;
                const std::size_t end = trim_trailing(s.text, begin, s.body_end);
                if (end <= begin || !has_content(s.text.substr(begin, end - begin), lex)) continue;
                AnswerCandidate c = make_candidate(page, s, QuestionType::Outcome, "R6", begin, end);
                c.clause = slice(s.text, w[cs].begin, trim_trailing(s.text, w[cs].begin, w[i - 1].end));
                return c;
            }
        } else if (previous && w.size() > marker_words.size()) {
            // "As a result, B" with A taken from the preceding sentence.
            bool match = true;
            for (std::size_t k = 0; k < marker_words.size(); ++k) {
                match = match && w[k].key == marker_words[k].key;
            }
            if (!match) continue;
            const std::size_t begin = w[marker_words.size()].begin;
            const std::size_t end = trim_trailing(s.text, begin, s.body_end);
            if (end <= begin || !has_content(s.text.substr(begin, end - begin), lex)) continue;
            if (previous->words.size() < 2) continue;
            AnswerCandidate c = make_candidate(page, s, QuestionType::Outcome, "R6", begin, end);
            c.clause = slice(previous->text, previous->begin, previous->body_end);
            return c;
        }
    }
    return std::nullopt;
}

std::optional<AnswerCandidate> rule_action(const Page& page, const SentenceContext& s, const Lexicons& lex) {
    const auto name = character_at_start(s.text, s.begin, s.body_end, page.characters);
    if (!name) return std::nullopt;
    const std::size_t begin = trim_leading(s.text, name->end, s.body_end);
    if (begin >= s.body_end || !has_content(s.text.substr(begin, s.body_end - begin), lex)) return std::nullopt;
    // "Papa Bear was very big" describes rather than acts.
    const auto rest = split_words(s.text, begin, s.body_end);
    if (!rest.empty() && (copulas().contains(rest.front().key) || linking_verbs().contains(rest.front().key))) {
        return std::nullopt;
    }
    AnswerCandidate c = make_candidate(page, s, QuestionType::Action, "R4", begin, s.body_end);
    c.focus_entity = name->name;
    return c;
}

SentenceContext make_sentence(std::string_view text, TextSpan span) {
    SentenceContext s;
    s.text = text;
    s.begin = span.begin;
    s.body_end = trim_trailing(text, span.begin, span.end);
    s.words = split_words(text, s.begin, s.body_end);
    return s;
}

std::size_t answer_position(const QAPair& qa) {
    if (qa.answer_span && qa.answer_span->page_index == qa.page_index) return qa.answer_span->begin;
    return std::numeric_limits<std::size_t>::max();
}

}  // namespace

std::string_view to_string(QuestionType type) {
    switch (type) {
        case QuestionType::Character: return "Character";
        case QuestionType::Setting: return "Setting";
        case QuestionType::Feeling: return "Feeling";
        case QuestionType::Action: return "Action";
        case QuestionType::CausalRelationship: return "CausalRelationship";
        case QuestionType::Outcome: return "Outcome";
        case QuestionType::Prediction: return "Prediction";
    }
    return "Action";
}

std::optional<QuestionType> parse_question_type(std::string_view name) {
    for (auto t : kAllQuestionTypes) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

std::string_view to_string(QASource source) {
    switch (source) {
        case QASource::RuleBased: return "RuleBased";
        case QASource::Remote: return "Remote";
        case QASource::ParentEdited: return "ParentEdited";
    }
    return "RuleBased";
}

std::optional<QASource> parse_qa_source(std::string_view name) {
    for (auto s : {QASource::RuleBased, QASource::Remote, QASource::ParentEdited}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

json rational_to_json(const Rational& r) {
    return {{"numerator", r.numerator()},
            {"denominator", r.denominator()},
            {"value", std::round(r.to_double() * 10000.0) / 10000.0}};
}

Rational rational_from_json(const json& doc) {
    if (!doc.is_object() || !doc.contains("numerator") || !doc.contains("denominator")) {
        throw SchemaError("numerator");
    }
    return {doc.at("numerator").get<std::int64_t>(), doc.at("denominator").get<std::int64_t>()};
}

json qa_pair_to_json(const QAPair& qa) {
    json doc = {{"id", qa.id},
                {"page_index", qa.page_index},
                {"question_text", qa.question_text},
                {"answer_text", qa.answer_text},
                {"type", to_string(qa.type)},
                {"rank_score", rational_to_json(qa.rank_score)},
                {"source", to_string(qa.source)}};
    if (qa.focus_entity) doc["focus_entity"] = *qa.focus_entity;
    if (qa.answer_span) {
        doc["answer_span"] = {{"page_index", qa.answer_span->page_index},
                              {"begin", qa.answer_span->begin},
                              {"end", qa.answer_span->end}};
    }
    return doc;
}

QAPair qa_pair_from_json(const json& doc) {
    auto str = [&](const char* key) {
        if (!doc.contains(key) || !doc.at(key).is_string()) throw SchemaError(key);
        return doc.at(key).get<std::string>();
    };
    QAPair qa;
    qa.id = str("id");
    if (!doc.contains("page_index") || !doc.at("page_index").is_number_integer()) throw SchemaError("page_index");
    qa.page_index = doc.at("page_index").get<int>();
    qa.question_text = str("question_text");
    qa.answer_text = str("answer_text");
    const auto type = parse_question_type(str("type"));
    if (!type) throw SchemaError("type");
    qa.type = *type;
    if (doc.contains("rank_score")) qa.rank_score = rational_from_json(doc.at("rank_score"));
    if (doc.contains("source")) {
        const auto source = parse_qa_source(str("source"));
        if (!source) throw SchemaError("source");
        qa.source = *source;
    }
    if (doc.contains("focus_entity") && doc.at("focus_entity").is_string()) {
        qa.focus_entity = doc.at("focus_entity").get<std::string>();
    }
    if (doc.contains("answer_span") && doc.at("answer_span").is_object()) {
        const auto& s = doc.at("answer_span");
        qa.answer_span = AnswerSpan{s.at("page_index").get<int>(), s.at("begin").get<std::size_t>(),
                                    s.at("end").get<std::size_t>()};
    }
    return qa;
}

bool is_well_formed(const QAPair& qa) {
    return !qa.question_text.empty() && qa.question_text.back() == '?' && !qa.answer_text.empty() &&
           qa.page_index >= 1;
}

std::vector<AnswerCandidate> extract_answer_candidates(const Page& page, const Page* next_page,
                                                       const Lexicons& lexicons) {
    std::vector<AnswerCandidate> out;
    const auto spans = split_sentences(page.text);
    std::optional<SentenceContext> previous;
    for (const auto& span : spans) {
        const SentenceContext s = make_sentence(page.text, span);
        if (s.words.empty()) continue;

        std::vector<AnswerCandidate> found;
        if (auto c = rule_character(page, s, lexicons)) found.push_back(std::move(*c));
        const std::size_t before_claims = found.size();
        if (auto c = rule_setting(page, s, lexicons)) found.push_back(std::move(*c));
        for (auto& c : rule_feeling(page, s, lexicons)) found.push_back(std::move(c));
        if (auto c = rule_causal(page, s, lexicons)) found.push_back(std::move(*c));
        if (auto c = rule_outcome(page, s, previous, lexicons)) found.push_back(std::move(*c));
        if (found.size() == before_claims) {
            if (auto c = rule_action(page, s, lexicons)) found.push_back(std::move(*c));
        }
        std::stable_sort(found.begin(), found.end(),
                         [](const AnswerCandidate& a, const AnswerCandidate& b) { return a.rule < b.rule; });
        for (auto& c : found) out.push_back(std::move(c));
        previous = s;
    }

    if (next_page != nullptr && !spans.empty()) {
        const auto next_spans = split_sentences(next_page->text);
        if (!next_spans.empty()) {
            const TextSpan first = next_spans.front();
            AnswerCandidate c;
            c.page_index = page.index;
            c.span = {next_page->index, first.begin, first.end};
            c.answer_text = slice(next_page->text, first.begin, first.end);
            c.type = QuestionType::Prediction;
            c.rule = "R7";
            c.sentence_begin = spans.back().begin;
            if (has_content(c.answer_text, lexicons)) out.push_back(std::move(c));
        }
    }
    return out;
}

std::string do_support(const std::string& clause, const std::vector<std::string>& characters,
                       const Lexicons& lexicons) {
    const auto words = split_words(clause, 0, clause.size());
    if (words.size() < 2) return "did " + clause;

    std::size_t verb = 0;
    if (const auto name = character_at_start(clause, 0, clause.size(), characters)) {
        verb = split_words(name->name, 0, name->name.size()).size();
    } else {
        for (std::size_t i = 1; i < words.size(); ++i) {
            const std::string& k = words[i].key;
            const bool past = lexicons.past_to_base.count(k) > 0 ||
                              (k.size() > 3 && k.compare(k.size() - 2, 2, "ed") == 0);
            if (auxiliaries().contains(k) || past) {
                verb = i;
                break;
            }
        }
        if (verb == 0) verb = 1;
    }
    if (verb >= words.size()) return "did " + clause;

    const std::string subject = lower_first(slice(clause, 0, words[verb - 1].end), lexicons);
    // Coordinated past verbs follow the main verb: "climbed ... and slept" -> "climb ... and sleep".
    std::string rest;
    std::size_t cursor = words[verb].end;
    for (std::size_t i = verb + 1; i < words.size(); ++i) {
        const auto it = lexicons.past_to_base.find(words[i].key);
        if (words[i - 1].key != "and" || it == lexicons.past_to_base.end() || !words[i].bare) continue;
        rest += slice(clause, cursor, words[i].begin) + it->second;
        cursor = words[i].end;
    }
    rest += slice(clause, cursor, clause.size());
    const std::string& key = words[verb].key;
    if (auxiliaries().contains(key)) return key + " " + subject + rest;
    const auto it = lexicons.past_to_base.find(key);
    const std::string base = it != lexicons.past_to_base.end() ? it->second : key;
    return "did " + subject + " " + base + rest;
}

std::vector<QAPair> generate_questions(const Page& page, const std::vector<AnswerCandidate>& candidates,
                                       const Lexicons& lexicons) {
    std::vector<QAPair> out;
    out.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const AnswerCandidate& c = candidates[i];
        QAPair qa;
        qa.id = "p" + std::to_string(page.index) + "-" + std::to_string(i + 1);
        qa.page_index = page.index;
        qa.answer_text = c.answer_text;
        qa.type = c.type;
        qa.source = QASource::RuleBased;
        qa.focus_entity = c.focus_entity;
        qa.answer_span = c.span;
        switch (c.type) {
            case QuestionType::Character:
                qa.question_text = "Who " + c.clause + "?";
                break;
            case QuestionType::Setting:
                qa.question_text = "Where " + do_support(c.clause, page.characters, lexicons) + "?";
                break;
            case QuestionType::Feeling:
                qa.question_text = "How did " + c.focus_entity.value_or("they") + " feel" +
                                   (c.context.empty() ? "" : " " + c.context) + "?";
                break;
            case QuestionType::Action:
                qa.question_text = "What did " + c.focus_entity.value_or("they") + " do?";
                break;
            case QuestionType::CausalRelationship:
                qa.question_text = "Why " + do_support(c.clause, page.characters, lexicons) + "?";
                break;
            case QuestionType::Outcome:
                qa.question_text = "What happened because " + lower_first(c.clause, lexicons) + "?";
                break;
            case QuestionType::Prediction:
                qa.question_text = std::string(kPredictionQuestion);
                break;
        }
        out.push_back(std::move(qa));
    }
    return out;
}

QuestionType classify_question_type(std::string_view question_text, const Lexicons& lexicons) {
    const auto tokens = tokenize(question_text).tokens;
    auto at = [&](std::size_t i) -> std::string_view { return i < tokens.size() ? tokens[i] : std::string_view{}; };
    auto has = [&](std::string_view word) { return std::find(tokens.begin(), tokens.end(), word) != tokens.end(); };
    auto has_phrase = [&](std::initializer_list<std::string_view> phrase) {
        const std::vector<std::string_view> p(phrase);
        for (std::size_t i = 0; i + p.size() <= tokens.size(); ++i) {
            if (std::equal(p.begin(), p.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
        }
        return false;
    };

    if (at(0) == "who") return QuestionType::Character;
    if (at(0) == "where" || at(0) == "when") return QuestionType::Setting;
    if (has("feel") || has("feeling")) return QuestionType::Feeling;
    if (at(0) == "how" && at(1) == "did" &&
        std::any_of(tokens.begin() + 2, tokens.end(), [&](const std::string& t) { return lexicons.emotions.contains(t); })) {
        return QuestionType::Feeling;
    }
    if (at(0) == "why" || (at(0) == "what" && at(1) == "makes")) return QuestionType::CausalRelationship;
    if (has("will") || has_phrase({"might", "happen", "next"})) return QuestionType::Prediction;
    if (has_phrase({"what", "happened", "because"}) || has("outcome") || has("consequence")) {
        return QuestionType::Outcome;
    }
    return QuestionType::Action;
}

int entity_frequency(const Storybook& book, std::string_view entity) {
    int count = 0;
    for (const Page& page : book.pages) count += static_cast<int>(find_whole_word(page.text, entity).size());
    return count;
}

Rational score_question(const QAPair& qa, const Storybook& book, const Lexicons& lexicons) {
    constexpr int kTypeWeight = 1;  // every type that survives the filter is enabled
    const int frequency = qa.focus_entity ? std::min(5, entity_frequency(book, *qa.focus_entity)) : 0;
    const auto answer_tokens = remove_stopwords(tokenize(qa.answer_text), lexicons.stopwords).size();
    const int fitness = (answer_tokens >= 2 && answer_tokens <= 15) ? 1 : 0;
    return Rational(3 * kTypeWeight + frequency + fitness);
}

void sort_by_rank(std::vector<QAPair>& pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const QAPair& a, const QAPair& b) {
        if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
        const auto pa = answer_position(a);
        const auto pb = answer_position(b);
        if (pa != pb) return pa < pb;
        if (a.question_text != b.question_text) return a.question_text < b.question_text;
        return a.id < b.id;
    });
}

std::vector<QAPair> rank_questions(std::vector<QAPair> pairs, const TypeSet& enabled, const Storybook& book,
                                   const Lexicons& lexicons) {
    std::erase_if(pairs, [&](const QAPair& qa) { return !enabled.contains(qa.type); });
    for (auto& qa : pairs) qa.rank_score = score_question(qa, book, lexicons);
    sort_by_rank(pairs);
    return pairs;
}

json generation_request_to_json(const GenerationRequest& request) {
    json types = json::array();
    for (auto t : request.enabled_types.types()) types.push_back(to_string(t));
    return {{"page_text", request.page_text}, {"enabled_types", types}, {"max_count", request.max_count}};
}

GenerationResponse parse_generation_response(std::string_view body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::parse_error& e) {
        throw RemoteError(std::string("generator returned malformed JSON: ") + e.what());
    }
    if (!doc.is_array()) throw RemoteError("generator response is not a JSON array");
    GenerationResponse out;
    for (const auto& item : doc) {
        if (!item.is_object()) continue;
        const auto q = item.find("question_text");
        const auto a = item.find("answer_text");
        const auto t = item.find("type");
        const auto s = item.find("score");
        if (q == item.end() || a == item.end() || t == item.end() || s == item.end()) continue;
        if (!q->is_string() || !a->is_string() || !t->is_string() || !s->is_number()) continue;
        out.push_back({q->get<std::string>(), a->get<std::string>(), t->get<std::string>(), s->get<double>()});
    }
    return out;
}

namespace {

std::vector<QAPair> accept_remote_items(const Storybook& book, const Page& page, const GenerationResponse& items,
                                        std::size_t max_count) {
    const Page* next = page.index < book.page_count() ? &book.page(page.index + 1) : nullptr;
    std::vector<QAPair> out;
    for (const auto& item : items) {
        if (out.size() >= max_count) break;
        const auto type = parse_question_type(item.type);
        if (!type || !std::isfinite(item.score)) continue;
        QAPair qa;
        qa.id = "p" + std::to_string(page.index) + "-r" + std::to_string(out.size() + 1);
        qa.page_index = page.index;
        qa.question_text = item.question_text;
        qa.answer_text = item.answer_text;
        qa.type = *type;
        qa.source = QASource::Remote;
        if (!is_well_formed(qa)) continue;

        const Page* grounding = *type == QuestionType::Prediction ? next : &page;
        if (grounding == nullptr) continue;
        const auto at = grounding->text.find(qa.answer_text);
        if (at == std::string::npos) continue;
        qa.answer_span = AnswerSpan{grounding->index, at, at + qa.answer_text.size()};
        if (const auto who = first_character(qa.question_text, 0, qa.question_text.size(), page.characters)) {
            qa.focus_entity = who->name;
        }
        out.push_back(std::move(qa));
    }
    return out;
}

}  // namespace

GenerationResult generate_for_page(const Storybook& book, int page_index, const TypeSet& enabled,
                                   const Lexicons& lexicons, const QuestionGenerator* remote) {
    const Page& page = book.page(page_index);
    GenerationResult result;
    if (remote != nullptr) {
        GenerationRequest request{page.text, enabled, 10};
        try {
            const auto items = remote->generate(request);
            result.pairs = rank_questions(accept_remote_items(book, page, items, static_cast<std::size_t>(request.max_count)),
                                          enabled, book, lexicons);
            return result;
        } catch (const RemoteError& e) {
            result.fell_back = true;
            result.fallback_reason = e.what();
        }
    }
    const Page* next = page_index < book.page_count() ? &book.page(page_index + 1) : nullptr;
    const auto candidates = extract_answer_candidates(page, next, lexicons);
    result.pairs = rank_questions(generate_questions(page, candidates, lexicons), enabled, book, lexicons);
    return result;
}

}  // namespace storybuddy
