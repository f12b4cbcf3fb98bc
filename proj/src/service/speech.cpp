#include "storybuddy/service/speech.hpp"

#include "storybuddy/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace storybuddy::service {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string media_type_for(const std::filesystem::path& path) {
    const auto ext = path.extension().string();
    if (ext == ".mp3") return "audio/mpeg";
    if (ext == ".wav") return "audio/wav";
    if (ext == ".ogg") return "audio/ogg";
    return "application/octet-stream";
}

}  // namespace

Audio NullSpeechClient::synthesize(const std::string&) const { return {"", "audio/mpeg"}; }

RecordedSpeechClient::RecordedSpeechClient(std::filesystem::path dir) : dir_(std::move(dir)) {
    const auto doc = nlohmann::json::parse(read_file(dir_ / "manifest.json"), nullptr, false);
    if (!doc.is_object()) throw ValidationError("speech manifest must be a JSON object");
    for (const auto& [phrase, file] : doc.items()) {
        if (!file.is_string()) throw ValidationError("speech manifest entry '" + phrase + "' is not a file name");
        manifest_.emplace(phrase, file.get<std::string>());
    }
}

Audio RecordedSpeechClient::synthesize(const std::string& text) const {
    const auto it = manifest_.find(text);
    if (it == manifest_.end()) throw ValidationError("no recording for phrase");
    const auto path = dir_ / it->second;
    return {read_file(path), media_type_for(path)};
}

RemoteSpeechClient::RemoteSpeechClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

Audio RemoteSpeechClient::synthesize(const std::string& text) const {
    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    const auto res = client.Post("/synthesize", nlohmann::json{{"text", text}}.dump(), "application/json");
    if (!res) throw RemoteError("speech service unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw RemoteError("speech service returned status " + std::to_string(res->status));
    const auto type = res->get_header_value("Content-Type");
    return {res->body, type.empty() ? "application/octet-stream" : type};
}

}  // namespace storybuddy::service
