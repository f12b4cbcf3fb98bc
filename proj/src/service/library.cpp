#include "storybuddy/service/library.hpp"

#include "storybuddy/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace storybuddy::service {

namespace fs = std::filesystem;

Library Library::load(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("library directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    Library lib;
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        std::ostringstream raw;
        raw << in.rdbuf();
        Storybook book;
        try {
            book = parse_storybook(raw.str());
        } catch (const Error& e) {
            throw ValidationError(file.filename().string() + ": " + e.what());
        }
        if (lib.books_.count(book.id) != 0) throw ValidationError("duplicate storybook id '" + book.id + "'");
        lib.index_.push_back({book.id, book.title, book.page_count(), book.pages.front().image});
        lib.books_.emplace(book.id, std::move(book));
    }
    return lib;
}

const Storybook* Library::find(std::string_view id) const {
    const auto it = books_.find(id);
    return it == books_.end() ? nullptr : &it->second;
}

}  // namespace storybuddy::service
