#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

namespace storybuddy::service {

struct Audio {
    std::string bytes;
    std::string media_type;
};

/// Text-to-speech boundary. The engine never depends on the audio it returns.
class SpeechSynthesisClient {
public:
    virtual ~SpeechSynthesisClient() = default;
    // Throws RemoteError when the backing service fails, ValidationError when
    // the phrase is unknown to a recorded client.
    virtual Audio synthesize(const std::string& text) const = 0;
};

// Empty audio, never fails.
class NullSpeechClient final : public SpeechSynthesisClient {
public:
    Audio synthesize(const std::string& text) const override;
};

// Serves pre-rendered files listed in <dir>/manifest.json as {"phrase": "file"}.
class RecordedSpeechClient final : public SpeechSynthesisClient {
public:
    explicit RecordedSpeechClient(std::filesystem::path dir);
    Audio synthesize(const std::string& text) const override;

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> manifest_;
};

// POST <base_url>/synthesize {"text": ...}; the response body is the audio.
class RemoteSpeechClient final : public SpeechSynthesisClient {
public:
    explicit RemoteSpeechClient(std::string base_url, std::chrono::milliseconds timeout = std::chrono::seconds(3));
    Audio synthesize(const std::string& text) const override;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

}  // namespace storybuddy::service
