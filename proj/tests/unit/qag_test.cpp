#include "storybuddy/qag.hpp"

#include "storybuddy/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace sb = storybuddy;
using sb::QuestionType;

namespace {

sb::Storybook book_of(std::vector<std::string> texts, std::vector<std::string> characters = {}) {
    sb::Storybook b;
    b.id = "t";
    b.title = "T";
    for (std::size_t i = 0; i < texts.size(); ++i) {
        sb::Page p;
        p.index = static_cast<int>(i + 1);
        p.text = texts[i];
        p.characters = characters;
        b.pages.push_back(p);
    }
    return b;
}

std::vector<sb::AnswerCandidate> extract(const std::string& text, std::vector<std::string> characters) {
    sb::Page p;
    p.index = 1;
    p.text = text;
    p.characters = std::move(characters);
    return sb::extract_answer_candidates(p, nullptr, sbtest::lex());
}

const sb::AnswerCandidate* find_type(const std::vector<sb::AnswerCandidate>& cs, QuestionType t) {
    for (const auto& c : cs) {
        if (c.type == t) return &c;
    }
    return nullptr;
}

std::vector<sb::QAPair> questions_for(const std::string& text, std::vector<std::string> characters) {
    sb::Page p;
    p.index = 1;
    p.text = text;
    p.characters = std::move(characters);
    return sb::generate_questions(p, sb::extract_answer_candidates(p, nullptr, sbtest::lex()), sbtest::lex());
}

const sb::QAPair* find_q(const std::vector<sb::QAPair>& qs, QuestionType t) {
    for (const auto& q : qs) {
        if (q.type == t) return &q;
    }
    return nullptr;
}

TEST(Extract, CausalBecause) {
    const auto cs = extract("Goldilocks ate the porridge because she was hungry.", {"Goldilocks"});
    const auto* c = find_type(cs, QuestionType::CausalRelationship);
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->answer_text, "because she was hungry");
    EXPECT_EQ(c->rule, "R5");
}

TEST(Extract, NothingFires) { EXPECT_TRUE(extract("The end.", {}).empty()); }

TEST(Extract, FeelingWithFocus) {
    const auto cs = extract("Baby Bear felt sad.", {"Baby Bear"});
    const auto* c = find_type(cs, QuestionType::Feeling);
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->answer_text, "sad");
    EXPECT_EQ(c->focus_entity, "Baby Bear");
}

TEST(Extract, StateSentencesAreNotActions) {
    for (const char* text : {"Papa Bear was very big.", "Goldilocks felt tired.", "Baby Bear looked sleepy."}) {
        EXPECT_EQ(find_type(extract(text, {"Papa Bear", "Goldilocks", "Baby Bear"}), QuestionType::Action), nullptr)
            << text;
    }
    EXPECT_NE(find_type(extract("Goldilocks climbed the stairs.", {"Goldilocks"}), QuestionType::Action), nullptr);
}

TEST(Extract, AnswerTextEqualsSpan) {
    const auto book = sbtest::fixture_book("three-bears");
    for (const auto& page : book.pages) {
        const sb::Page* next = page.index < book.page_count() ? &book.page(page.index + 1) : nullptr;
        for (const auto& c : sb::extract_answer_candidates(page, next, sbtest::lex())) {
            const auto& src = book.page(c.span.page_index).text;
            EXPECT_EQ(src.substr(c.span.begin, c.span.end - c.span.begin), c.answer_text);
            EXPECT_FALSE(sb::content_tokens(c.answer_text, sbtest::lex().stopwords).empty());
        }
    }
}

TEST(Generate, FeelingTemplateWithContext) {
    const auto qs = questions_for("Baby Bear felt sad when he saw his bowl.", {"Baby Bear"});
    const auto* q = find_q(qs, QuestionType::Feeling);
    ASSERT_NE(q, nullptr);
    EXPECT_EQ(q->question_text, "How did Baby Bear feel when he saw his bowl?");
    EXPECT_EQ(q->answer_text, "sad");
}

TEST(Generate, CausalTemplateUsesDoSupport) {
    const auto qs = questions_for("Goldilocks ran away because she was scared.", {"Goldilocks"});
    const auto* q = find_q(qs, QuestionType::CausalRelationship);
    ASSERT_NE(q, nullptr);
    EXPECT_EQ(q->question_text, "Why did Goldilocks run away?");
    EXPECT_EQ(q->answer_text, "because she was scared");
}

TEST(Generate, CharacterSettingOutcomeAction) {
    auto qs = questions_for("Goldilocks walked into the woods.", {"Goldilocks"});
    ASSERT_NE(find_q(qs, QuestionType::Character), nullptr);
    EXPECT_EQ(find_q(qs, QuestionType::Character)->question_text, "Who walked into the woods?");
    EXPECT_EQ(find_q(qs, QuestionType::Character)->answer_text, "Goldilocks");

    qs = questions_for("Goldilocks slept in the small bed.", {"Goldilocks"});
    ASSERT_NE(find_q(qs, QuestionType::Setting), nullptr);
    EXPECT_EQ(find_q(qs, QuestionType::Setting)->question_text, "Where did Goldilocks sleep?");
    EXPECT_EQ(find_q(qs, QuestionType::Setting)->answer_text, "the small bed");
    EXPECT_EQ(find_q(qs, QuestionType::Action), nullptr);  // claimed by the setting rule

    qs = questions_for("The porridge was too hot, so the bears went for a walk.", {});
    ASSERT_NE(find_q(qs, QuestionType::Outcome), nullptr);
    EXPECT_EQ(find_q(qs, QuestionType::Outcome)->question_text, "What happened because the porridge was too hot?");
    EXPECT_EQ(find_q(qs, QuestionType::Outcome)->answer_text, "the bears went for a walk");

    qs = questions_for("Goldilocks was tired. As a result, she took a long nap.", {"Goldilocks"});
    ASSERT_NE(find_q(qs, QuestionType::Outcome), nullptr);
    EXPECT_EQ(find_q(qs, QuestionType::Outcome)->question_text, "What happened because Goldilocks was tired?");
    EXPECT_EQ(find_q(qs, QuestionType::Outcome)->answer_text, "she took a long nap");

    qs = questions_for("Goldilocks knocked loudly.", {"Goldilocks"});
    ASSERT_NE(find_q(qs, QuestionType::Action), nullptr);
    EXPECT_EQ(find_q(qs, QuestionType::Action)->question_text, "What did Goldilocks do?");
    EXPECT_EQ(find_q(qs, QuestionType::Action)->answer_text, "knocked loudly");
}

TEST(Generate, PredictionOnNonFinalPagesOnly) {
    const auto book = book_of({"A bear woke up.", "The bear went out. Then it rained.", "The bear came home."});
    const auto page2 = sb::generate_for_page(book, 2, sb::TypeSet::all(), sbtest::lex()).pairs;
    const auto* q = find_q(page2, QuestionType::Prediction);
    ASSERT_NE(q, nullptr);
    EXPECT_EQ(q->question_text, "What do you think will happen next?");
    EXPECT_EQ(q->answer_text, "The bear came home.");
    ASSERT_TRUE(q->answer_span);
    EXPECT_EQ(q->answer_span->page_index, 3);

    const auto page3 = sb::generate_for_page(book, 3, sb::TypeSet::all(), sbtest::lex()).pairs;
    EXPECT_EQ(find_q(page3, QuestionType::Prediction), nullptr);
}

TEST(Generate, IdsAreStableAndWellFormed) {
    const auto qs = questions_for("Goldilocks ate the porridge in the kitchen because she was hungry.", {"Goldilocks"});
    for (std::size_t i = 0; i < qs.size(); ++i) {
        EXPECT_EQ(qs[i].id, "p1-" + std::to_string(i + 1));
        EXPECT_TRUE(sb::is_well_formed(qs[i]));
    }
}

TEST(DoSupport, Forms) {
    const auto& l = sbtest::lex();
    EXPECT_EQ(sb::do_support("Goldilocks ate the porridge", {"Goldilocks"}, l), "did Goldilocks eat the porridge");
    EXPECT_EQ(sb::do_support("Baby Bear was sad", {"Baby Bear"}, l), "was Baby Bear sad");
    EXPECT_EQ(sb::do_support("The bears walked home", {}, l), "did the bears walk home");
    EXPECT_EQ(sb::do_support("she climbed the stairs and slept", {}, l), "did she climb the stairs and sleep");
    // Unknown verbs keep their surface form.
    EXPECT_EQ(sb::do_support("the fox zoomed away", {}, l), "did the fox zoomed away");
}

TEST(Classify, ReferenceExamples) {
    const auto& l = sbtest::lex();
    EXPECT_EQ(sb::classify_question_type("How did the princess feel in her new home?", l), QuestionType::Feeling);
    EXPECT_EQ(sb::classify_question_type("What did the cook do after she opened the hamper?", l), QuestionType::Action);
    EXPECT_EQ(sb::classify_question_type("How will the other animals treat the duckling?", l),
              QuestionType::Prediction);
}

TEST(Classify, KeywordTable) {
    const auto& l = sbtest::lex();
    const std::pair<const char*, QuestionType> cases[] = {
        {"Who ate the porridge?", QuestionType::Character},
        {"Where did the bears live?", QuestionType::Setting},
        {"When did the story happen?", QuestionType::Setting},
        {"How did Baby Bear look, sad?", QuestionType::Feeling},
        {"Why did she run?", QuestionType::CausalRelationship},
        {"What makes the duckling sad?", QuestionType::CausalRelationship},
        {"What might happen next?", QuestionType::Prediction},
        {"What happened because the porridge was hot?", QuestionType::Outcome},
        {"What was the outcome of the race?", QuestionType::Outcome},
        {"What did Goldilocks do?", QuestionType::Action},
        {"Who will win?", QuestionType::Character},  // leading word takes precedence
    };
    for (const auto& [text, type] : cases) EXPECT_EQ(sb::classify_question_type(text, l), type) << text;
}

TEST(Classify, TotalOnArbitraryText) {
    std::mt19937 rng(3);
    for (int i = 0; i < 500; ++i) {
        std::string s;
        for (int k = 0; k < 30; ++k) s += static_cast<char>(1 + rng() % 255);
        EXPECT_NO_THROW(sb::classify_question_type(s, sbtest::lex()));
    }
}

TEST(Rank, OrdersByScore) {
    std::vector<sb::QAPair> qs = {sbtest::make_qa("b", "B?", "x"), sbtest::make_qa("a", "A?", "x")};
    qs[0].rank_score = sb::Rational(3, 2);
    qs[1].rank_score = sb::Rational(5, 2);
    sb::sort_by_rank(qs);
    EXPECT_EQ(qs[0].id, "a");
    EXPECT_EQ(qs[1].id, "b");
}

TEST(Rank, TiesBreakOnPositionThenText) {
    auto a = sbtest::make_qa("a", "Zebra?", "x");
    auto b = sbtest::make_qa("b", "Apple?", "x");
    auto c = sbtest::make_qa("c", "Mango?", "x");
    a.answer_span = sb::AnswerSpan{1, 0, 1};
    b.answer_span = sb::AnswerSpan{1, 10, 11};
    c.answer_span = sb::AnswerSpan{1, 10, 11};
    std::vector<sb::QAPair> qs = {c, b, a};
    sb::sort_by_rank(qs);
    EXPECT_EQ(qs[0].id, "a");
    EXPECT_EQ(qs[1].id, "b");
    EXPECT_EQ(qs[2].id, "c");
}

TEST(Rank, EntityFrequencyFavorsSalientCharacters) {
    const auto book = book_of({"Rosa met Tom. Rosa sang. Rosa ran. Rosa hid."}, {"Rosa", "Tom"});
    EXPECT_EQ(sb::entity_frequency(book, "Rosa"), 4);
    EXPECT_EQ(sb::entity_frequency(book, "Tom"), 1);
    auto rosa = sbtest::make_qa("p1-1", "Who sang?", "Rosa", 0, QuestionType::Character);
    auto tom = sbtest::make_qa("p1-2", "Who was met?", "Tom", 0, QuestionType::Character);
    rosa.focus_entity = "Rosa";
    tom.focus_entity = "Tom";
    const auto ranked = sb::rank_questions({tom, rosa}, sb::TypeSet::all(), book, sbtest::lex());
    EXPECT_EQ(ranked[0].id, "p1-1");
    // 3 for the enabled type, frequency 4, answer of one content token.
    EXPECT_EQ(ranked[0].rank_score, sb::Rational(7));
    EXPECT_EQ(ranked[1].rank_score, sb::Rational(4));
}

TEST(Rank, FrequencyCapsAtFive) {
    const auto book = book_of({"Ana. Ana. Ana. Ana. Ana. Ana. Ana."}, {"Ana"});
    auto q = sbtest::make_qa("p1-1", "Who?", "Ana went home", 0, QuestionType::Character);
    q.focus_entity = "Ana";
    EXPECT_EQ(sb::score_question(q, book, sbtest::lex()), sb::Rational(3 + 5 + 1));
}

TEST(Rank, DropsDisabledTypes) {
    std::vector<sb::QAPair> qs = {sbtest::make_qa("a", "A?", "x y", 0, QuestionType::Feeling),
                                  sbtest::make_qa("b", "B?", "x y", 0, QuestionType::Setting)};
    const auto ranked = sb::rank_questions(qs, sb::TypeSet{QuestionType::Setting}, book_of({"x"}), sbtest::lex());
    ASSERT_EQ(ranked.size(), 1u);
    EXPECT_EQ(ranked[0].id, "b");
}

TEST(GenerateForPage, FixturePageOneAllTypes) {
    const auto book = sbtest::fixture_book("three-bears");
    const auto r = sb::generate_for_page(book, 1, sb::TypeSet::all(), sbtest::lex());
    EXPECT_FALSE(r.fell_back);
    ASSERT_FALSE(r.pairs.empty());
    for (std::size_t i = 1; i < r.pairs.size(); ++i) EXPECT_GE(r.pairs[i - 1].rank_score, r.pairs[i].rank_score);
    EXPECT_EQ(r.pairs.front().question_text, "Who stirred the big pot of porridge?");
    EXPECT_EQ(r.pairs.front().answer_text, "Baby Bear");
}

TEST(GenerateForPage, FeelingOnlyOnEmotionFreePage) {
    const auto book = book_of({"The bears lived in a house in the woods."});
    EXPECT_TRUE(sb::generate_for_page(book, 1, sb::TypeSet{QuestionType::Feeling}, sbtest::lex()).pairs.empty());
}

class FakeGenerator : public sb::QuestionGenerator {
public:
    explicit FakeGenerator(std::string body, bool fail = false) : body_(std::move(body)), fail_(fail) {}
    sb::GenerationResponse generate(const sb::GenerationRequest& request) const override {
        last_request = request;
        if (fail_) throw sb::RemoteError("timed out");
        return sb::parse_generation_response(body_);
    }
    mutable sb::GenerationRequest last_request;

private:
    std::string body_;
    bool fail_;
};

TEST(GenerateForPage, RemoteItemsValidatedItemWise) {
    const auto book = book_of({"Goldilocks ate the porridge."}, {"Goldilocks"});
    const FakeGenerator remote(R"([
        {"question_text": "What did Goldilocks eat?", "answer_text": "the porridge", "type": "Action", "score": 0.9},
        {"question_text": "No question mark", "answer_text": "porridge", "type": "Action", "score": 0.5}
    ])");
    const auto r = sb::generate_for_page(book, 1, sb::TypeSet::all(), sbtest::lex(), &remote);
    EXPECT_FALSE(r.fell_back);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0].question_text, "What did Goldilocks eat?");
    EXPECT_EQ(r.pairs[0].source, sb::QASource::Remote);
    EXPECT_EQ(remote.last_request.page_text, "Goldilocks ate the porridge.");
}

TEST(GenerateForPage, RemoteDropsUngroundedAndDisabled) {
    const auto book = book_of({"Goldilocks ate the porridge."}, {"Goldilocks"});
    const FakeGenerator remote(R"([
        {"question_text": "What did she eat?", "answer_text": "pizza", "type": "Action", "score": 1},
        {"question_text": "Who ate?", "answer_text": "Goldilocks", "type": "Character", "score": 1},
        {"question_text": "Who ate?", "answer_text": "Goldilocks", "type": "Villain", "score": 1},
        "not an object"
    ])");
    const auto r = sb::generate_for_page(book, 1, sb::TypeSet{QuestionType::Action}, sbtest::lex(), &remote);
    EXPECT_TRUE(r.pairs.empty());
}

TEST(GenerateForPage, RemoteFailureFallsBackToRules) {
    const auto book = sbtest::fixture_book("three-bears");
    const FakeGenerator remote("", true);
    const auto r = sb::generate_for_page(book, 1, sb::TypeSet::all(), sbtest::lex(), &remote);
    EXPECT_TRUE(r.fell_back);
    EXPECT_FALSE(r.fallback_reason.empty());
    EXPECT_EQ(r.pairs, sb::generate_for_page(book, 1, sb::TypeSet::all(), sbtest::lex()).pairs);

    const FakeGenerator garbage("{\"not\": \"an array\"}");
    EXPECT_TRUE(sb::generate_for_page(book, 1, sb::TypeSet::all(), sbtest::lex(), &garbage).fell_back);
}

TEST(QAPairJson, RoundTrips) {
    const auto book = sbtest::fixture_book("three-bears");
    for (const auto& page : book.pages) {
        for (const auto& qa : sb::generate_for_page(book, page.index, sb::TypeSet::all(), sbtest::lex()).pairs) {
            EXPECT_EQ(sb::qa_pair_from_json(sb::qa_pair_to_json(qa)), qa);
        }
    }
}

TEST(RationalJson, Shape) {
    const auto j = sb::rational_to_json(sb::Rational(6, 8));
    EXPECT_EQ(j.at("numerator"), 3);
    EXPECT_EQ(j.at("denominator"), 4);
    EXPECT_DOUBLE_EQ(j.at("value").get<double>(), 0.75);
    EXPECT_DOUBLE_EQ(sb::rational_to_json(sb::Rational(1, 3)).at("value").get<double>(), 0.3333);
}

}  // namespace
