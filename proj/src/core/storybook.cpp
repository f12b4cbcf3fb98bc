#include "storybuddy/storybook.hpp"

#include "storybuddy/error.hpp"
#include "storybuddy/text.hpp"

namespace storybuddy {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(path + key);
    return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_string()) throw SchemaError(path + key);
    return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw SchemaError(path + key);
    return it->get<std::string>();
}

bool url_safe(std::string_view id) {
    for (const char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.' || c == '~';
        if (!ok) return false;
    }
    return true;
}

}  // namespace

const Page& Storybook::page(int index) const {
    if (index < 1 || index > page_count()) {
        throw ValidationError("page " + std::to_string(index) + " out of range for '" + id + "'");
    }
    return pages[static_cast<std::size_t>(index - 1)];
}

Storybook storybook_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("<root>");
    Storybook book;
    book.id = require_string(doc, "id", "");
    book.title = require_string(doc, "title", "");
    book.reading_level = optional_string(doc, "reading_level", "");

    const json& pages = require(doc, "pages", "");
    if (!pages.is_array()) throw SchemaError("pages");
    for (std::size_t i = 0; i < pages.size(); ++i) {
        const std::string path = "pages[" + std::to_string(i) + "].";
        const json& p = pages[i];
        if (!p.is_object()) throw SchemaError("pages[" + std::to_string(i) + "]");
        Page page;
        const json& index = require(p, "index", path);
        if (!index.is_number_integer()) throw SchemaError(path + "index");
        page.index = index.get<int>();
        page.text = require_string(p, "text", path);
        page.image = optional_string(p, "image", path);
        if (const auto it = p.find("characters"); it != p.end() && !it->is_null()) {
            if (!it->is_array()) throw SchemaError(path + "characters");
            for (const auto& name : *it) {
                if (!name.is_string()) throw SchemaError(path + "characters");
                page.characters.push_back(name.get<std::string>());
            }
        }
        book.pages.push_back(std::move(page));
    }
    validate_storybook(book);
    return book;
}

void validate_storybook(const Storybook& book) {
    if (book.id.empty()) throw ValidationError("storybook id is empty");
    if (!url_safe(book.id)) throw ValidationError("storybook id '" + book.id + "' is not URL-safe");
    if (book.pages.empty()) throw ValidationError("storybook '" + book.id + "' has no pages");

    std::string all_text;
    for (std::size_t i = 0; i < book.pages.size(); ++i) {
        const Page& page = book.pages[i];
        if (page.index != static_cast<int>(i) + 1) {
            throw ValidationError("non-contiguous page index " + std::to_string(page.index));
        }
        if (page.text.empty()) {
            throw ValidationError("page " + std::to_string(page.index) + ": empty text");
        }
        std::size_t bad = 0;
        if (!is_valid_utf8(page.text, &bad)) {
            throw ValidationError("page " + std::to_string(page.index) + ": invalid UTF-8 in text");
        }
        all_text += page.text;
        all_text += '\n';
    }
    for (const Page& page : book.pages) {
        for (const auto& name : page.characters) {
            if (name.empty()) {
                throw ValidationError("page " + std::to_string(page.index) + ": empty character name");
            }
            if (ascii_lower(all_text).find(ascii_lower(name)) == std::string::npos) {
                throw ValidationError("page " + std::to_string(page.index) + ": character '" + name +
                                      "' does not appear in the story text");
            }
        }
    }
}

Storybook parse_storybook(std::string_view raw_json) {
    std::size_t bad = 0;
    if (!is_valid_utf8(raw_json, &bad)) throw FormatError("invalid UTF-8", bad);
    json doc;
    try {
        doc = json::parse(raw_json);
    } catch (const json::parse_error& e) {
        throw FormatError("malformed JSON", e.byte);
    }
    return storybook_from_json(doc);
}

nlohmann::ordered_json storybook_to_json(const Storybook& book) {
    nlohmann::ordered_json doc;
    doc["id"] = book.id;
    doc["title"] = book.title;
    if (book.reading_level) doc["reading_level"] = *book.reading_level;
    auto pages = nlohmann::ordered_json::array();
    for (const Page& page : book.pages) {
        nlohmann::ordered_json p;
        p["index"] = page.index;
        p["text"] = page.text;
        if (page.image) p["image"] = *page.image;
        if (!page.characters.empty()) p["characters"] = page.characters;
        pages.push_back(std::move(p));
    }
    doc["pages"] = std::move(pages);
    return doc;
}

std::string serialize_storybook(const Storybook& book) { return storybook_to_json(book).dump(); }

}  // namespace storybuddy
