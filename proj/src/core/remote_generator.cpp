#include "storybuddy/remote_generator.hpp"

#include "storybuddy/error.hpp"

#include <httplib.h>

namespace storybuddy {

HttpQuestionGenerator::HttpQuestionGenerator(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

GenerationResponse HttpQuestionGenerator::generate(const GenerationRequest& request) const {
    httplib::Client client(base_url_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const auto res = client.Post("/generate", generation_request_to_json(request).dump(), "application/json");
    if (!res) throw RemoteError("generator request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw RemoteError("generator returned HTTP " + std::to_string(res->status));
    return parse_generation_response(res->body);
}

}  // namespace storybuddy
