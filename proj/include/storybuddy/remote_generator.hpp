#pragma once

#include "storybuddy/qag.hpp"

#include <chrono>
#include <string>

namespace storybuddy {

/// JSON-over-HTTP client for an external question generator: POSTs a
/// GenerationRequest to <base_url>/generate and expects a JSON array of items.
/// Safe to share between threads; each call opens its own connection.
class HttpQuestionGenerator final : public QuestionGenerator {
public:
    explicit HttpQuestionGenerator(std::string base_url,
                                   std::chrono::milliseconds timeout = std::chrono::seconds(3));

    GenerationResponse generate(const GenerationRequest& request) const override;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

}  // namespace storybuddy
