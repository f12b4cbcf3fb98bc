#pragma once

#include <array>
#include <bitset>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storybuddy {

/// The seven narrative elements a question can target.
enum class QuestionType {
    Character,
    Setting,
    Feeling,
    Action,
    CausalRelationship,
    Outcome,
    Prediction,
};

inline constexpr std::array<QuestionType, 7> kAllQuestionTypes = {
    QuestionType::Character,          QuestionType::Setting, QuestionType::Feeling,
    QuestionType::Action,             QuestionType::CausalRelationship,
    QuestionType::Outcome,            QuestionType::Prediction,
};

std::string_view to_string(QuestionType type);
std::optional<QuestionType> parse_question_type(std::string_view name);

/// A subset of the seven question types.
class TypeSet {
public:
    TypeSet() = default;
    TypeSet(std::initializer_list<QuestionType> types) {
        for (auto t : types) insert(t);
    }

    static TypeSet all() {
        TypeSet s;
        s.bits_.set();
        return s;
    }
    // Bit i corresponds to kAllQuestionTypes[i].
    static TypeSet from_mask(unsigned mask) {
        TypeSet s;
        s.bits_ = std::bitset<7>(mask & 0x7Fu);
        return s;
    }

    void insert(QuestionType t) { bits_.set(static_cast<std::size_t>(t)); }
    bool contains(QuestionType t) const { return bits_.test(static_cast<std::size_t>(t)); }
    bool empty() const { return bits_.none(); }
    std::size_t size() const { return bits_.count(); }
    unsigned mask() const { return static_cast<unsigned>(bits_.to_ulong()); }

    std::vector<QuestionType> types() const {
        std::vector<QuestionType> out;
        for (auto t : kAllQuestionTypes) {
            if (contains(t)) out.push_back(t);
        }
        return out;
    }

    friend bool operator==(const TypeSet&, const TypeSet&) = default;

private:
    std::bitset<7> bits_;
};

}  // namespace storybuddy
