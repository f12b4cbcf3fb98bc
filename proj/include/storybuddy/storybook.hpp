#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace storybuddy {

struct Page {
    int index = 0;
    std::string text;
    std::optional<std::string> image;
    std::vector<std::string> characters;

    friend bool operator==(const Page&, const Page&) = default;
};

struct Storybook {
    std::string id;
    std::string title;
    std::optional<std::string> reading_level;
    std::vector<Page> pages;

    int page_count() const noexcept { return static_cast<int>(pages.size()); }
    // 1-based; throws ValidationError when out of range.
    const Page& page(int index) const;

    friend bool operator==(const Storybook&, const Storybook&) = default;
};

/// Parses and validates one storybook document.
///
/// Throws FormatError for malformed JSON or UTF-8 (with the byte offset),
/// SchemaError naming the first missing or mistyped field, and
/// ValidationError for invariant violations such as non-contiguous pages.
Storybook parse_storybook(std::string_view raw_json);
Storybook storybook_from_json(const nlohmann::json& doc);

// Compact canonical form: fixed key order, optional keys omitted when absent.
std::string serialize_storybook(const Storybook& book);
nlohmann::ordered_json storybook_to_json(const Storybook& book);

// Re-checks every invariant of an in-memory storybook.
void validate_storybook(const Storybook& book);

}  // namespace storybuddy
