#pragma once

#include "storybuddy/storybook.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace storybuddy::service {

struct LibraryEntry {
    std::string storybook_id;
    std::string title;
    int page_count = 0;
    std::optional<std::string> cover;  // first page image, relative to the library directory
};

/// Read-only folder of storybook JSON files, loaded once at startup.
class Library {
public:
    // Every *.json file in the directory must parse; duplicate ids are rejected.
    static Library load(const std::filesystem::path& dir);

    const std::vector<LibraryEntry>& index() const noexcept { return index_; }
    const Storybook* find(std::string_view id) const;

private:
    std::vector<LibraryEntry> index_;
    std::map<std::string, Storybook, std::less<>> books_;
};

}  // namespace storybuddy::service
