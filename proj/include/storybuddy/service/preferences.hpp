#pragma once

#include "storybuddy/qag.hpp"
#include "storybuddy/question_type.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace storybuddy::service {

struct StoryOverrides {
    std::map<int, std::vector<std::string>> selected;  // page -> chosen question ids, in ask order
    std::vector<QAPair> edited;                          // parent edits, keyed by the id they replace
};

struct PreferenceConfig {
    TypeSet enabled_types = TypeSet::all();
    std::map<std::string, StoryOverrides> per_story_overrides;
};

nlohmann::json preferences_to_json(const PreferenceConfig& config);
// Throws SchemaError or ValidationError (empty or unknown type names).
PreferenceConfig preferences_from_json(const nlohmann::json& doc);

nlohmann::json type_set_to_json(const TypeSet& types);
// Throws ValidationError naming the first unknown type; an empty list is returned as-is.
TypeSet type_set_from_json(const nlohmann::json& doc);

}  // namespace storybuddy::service
