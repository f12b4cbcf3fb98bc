#include "storybuddy/service/store.hpp"

#include "storybuddy/error.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace storybuddy::service {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const std::string& what, const fs::path& path) {
    throw Error(what + " '" + path.string() + "': " + std::strerror(errno));
}

void sync_directory(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

std::optional<nlohmann::json> read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream raw;
    raw << in.rdbuf();
    auto doc = nlohmann::json::parse(raw.str(), nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    return doc;
}

}  // namespace

void write_file_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) fail("cannot create", tmp);
    std::size_t written = 0;
    while (written < contents.size()) {
        const ssize_t n = ::write(fd, contents.data() + written, contents.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            ::close(fd);
            fail("cannot write", tmp);
        }
        written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        fail("cannot sync", tmp);
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) fail("cannot rename onto", path);
    sync_directory(path.parent_path());
}

FileStore::FileStore(fs::path data_dir) : root_(std::move(data_dir)), sessions_(root_ / "sessions") {
    fs::create_directories(sessions_);
}

std::optional<nlohmann::json> FileStore::load_config() const { return read_json(root_ / "config.json"); }

void FileStore::save_config(const nlohmann::json& config) const {
    write_file_atomic(root_ / "config.json", config.dump(2) + "\n");
}

void FileStore::save_transcript(const std::string& session_id, const nlohmann::json& transcript) const {
    write_file_atomic(sessions_ / (session_id + ".json"), transcript.dump(2) + "\n");
}

std::vector<nlohmann::json> FileStore::load_transcripts(std::vector<std::string>* problems) const {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(sessions_)) {
        const auto& p = entry.path();
        if (entry.is_regular_file() && p.extension() == ".json" && p.filename() != "index.json") files.push_back(p);
    }
    std::sort(files.begin(), files.end());
    std::vector<nlohmann::json> out;
    for (const auto& file : files) {
        auto doc = read_json(file);
        if (!doc) {
            if (problems != nullptr) problems->push_back(file.filename().string() + ": not valid JSON");
            continue;
        }
        out.push_back(std::move(*doc));
    }
    return out;
}

void FileStore::save_index(const nlohmann::json& index) const {
    write_file_atomic(sessions_ / "index.json", index.dump(2) + "\n");
}

std::optional<nlohmann::json> FileStore::load_index() const { return read_json(sessions_ / "index.json"); }

}  // namespace storybuddy::service
