#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace storybuddy::service {

// Writes to a sibling temp file, syncs it, and renames it over the target, so
// readers see either the old or the new contents and never a torn file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Plain-file persistence under one data directory:
///   config.json            preferences
///   sessions/<id>.json     one transcript per session, rewritten after every transition
///   sessions/index.json    session summaries, rebuilt from the transcripts on open
class FileStore {
public:
    explicit FileStore(std::filesystem::path data_dir);

    const std::filesystem::path& root() const noexcept { return root_; }

    std::optional<nlohmann::json> load_config() const;
    void save_config(const nlohmann::json& config) const;

    void save_transcript(const std::string& session_id, const nlohmann::json& transcript) const;
    // Every transcript file, sorted by session id. Unreadable files are skipped
    // and reported through `problems`.
    std::vector<nlohmann::json> load_transcripts(std::vector<std::string>* problems = nullptr) const;

    void save_index(const nlohmann::json& index) const;
    std::optional<nlohmann::json> load_index() const;

private:
    std::filesystem::path root_;
    std::filesystem::path sessions_;
};

}  // namespace storybuddy::service
