#include "storybuddy/service/preferences.hpp"

#include "storybuddy/error.hpp"

namespace storybuddy::service {

using nlohmann::json;

json type_set_to_json(const TypeSet& types) {
    json out = json::array();
    for (auto t : types.types()) out.push_back(to_string(t));
    return out;
}

TypeSet type_set_from_json(const json& doc) {
    if (!doc.is_array()) throw SchemaError("enabled_types");
    TypeSet out;
    for (const auto& item : doc) {
        const auto type = item.is_string() ? parse_question_type(item.get<std::string>()) : std::nullopt;
        if (!type) throw ValidationError("unknown question type " + item.dump());
        out.insert(*type);
    }
    return out;
}

json preferences_to_json(const PreferenceConfig& config) {
    json overrides = json::object();
    for (const auto& [story, o] : config.per_story_overrides) {
        json selected = json::object();
        for (const auto& [page, ids] : o.selected) selected[std::to_string(page)] = ids;
        json edited = json::array();
        for (const auto& qa : o.edited) edited.push_back(qa_pair_to_json(qa));
        overrides[story] = {{"selected", selected}, {"edited", edited}};
    }
    return {{"enabled_types", type_set_to_json(config.enabled_types)}, {"per_story_overrides", overrides}};
}

PreferenceConfig preferences_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("<root>");
    PreferenceConfig config;
    if (!doc.contains("enabled_types")) throw SchemaError("enabled_types");
    config.enabled_types = type_set_from_json(doc.at("enabled_types"));
    if (config.enabled_types.empty()) throw ValidationError("enabled_types must not be empty");

    if (const auto it = doc.find("per_story_overrides"); it != doc.end()) {
        if (!it->is_object()) throw SchemaError("per_story_overrides");
        for (const auto& [story, o] : it->items()) {
            if (!o.is_object()) throw SchemaError("per_story_overrides." + story);
            StoryOverrides out;
            if (const auto sel = o.find("selected"); sel != o.end()) {
                if (!sel->is_object()) throw SchemaError("per_story_overrides." + story + ".selected");
                for (const auto& [page, ids] : sel->items()) {
                    int index = 0;
                    try {
                        index = std::stoi(page);
                    } catch (const std::exception&) {
                        throw ValidationError("page key '" + page + "' is not a number");
                    }
                    if (!ids.is_array()) throw SchemaError("per_story_overrides." + story + ".selected." + page);
                    for (const auto& id : ids) {
                        if (!id.is_string()) throw SchemaError("per_story_overrides." + story + ".selected." + page);
                        out.selected[index].push_back(id.get<std::string>());
                    }
                }
            }
            if (const auto ed = o.find("edited"); ed != o.end()) {
                if (!ed->is_array()) throw SchemaError("per_story_overrides." + story + ".edited");
                for (const auto& qa : *ed) {
                    QAPair pair = qa_pair_from_json(qa);
                    if (!is_well_formed(pair)) throw ValidationError("edited question '" + pair.id + "' is malformed");
                    out.edited.push_back(std::move(pair));
                }
            }
            config.per_story_overrides.emplace(story, std::move(out));
        }
    }
    return config;
}

}  // namespace storybuddy::service
