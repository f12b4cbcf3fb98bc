#pragma once

#include "storybuddy/answer_matcher.hpp"
#include "storybuddy/dashboard.hpp"
#include "storybuddy/followup.hpp"
#include "storybuddy/lexicons.hpp"
#include "storybuddy/qag.hpp"
#include "storybuddy/service/entropy.hpp"
#include "storybuddy/service/library.hpp"
#include "storybuddy/service/preferences.hpp"
#include "storybuddy/service/speech.hpp"
#include "storybuddy/service/store.hpp"
#include "storybuddy/session.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace storybuddy::service {

/// Transport-neutral response. `raw` is sent verbatim when set, otherwise `body` as JSON.
struct ApiResponse {
    int status = 200;
    nlohmann::json body;
    std::optional<std::string> raw;
    std::string content_type = "application/json";
};

ApiResponse error_response(int status, std::string code, std::string detail);

struct ServiceOptions {
    std::filesystem::path library_dir;
    std::filesystem::path data_dir;
    std::filesystem::path lexicon_dir = Lexicons::default_dir();
    int utc_offset_minutes = 0;
    std::shared_ptr<const SpeechSynthesisClient> speech = std::make_shared<NullSpeechClient>();
    std::shared_ptr<const QuestionGenerator> generator;  // null: rule-based only
};

/// One page of a story's questions after preferences and parent edits apply.
struct ResolvedPage {
    int page_index = 0;
    std::vector<QAPair> questions;  // ranked
    AnchorSet anchors;
    std::vector<std::string> default_selection;
    std::vector<std::string> selected;
    bool fell_back = false;
    std::string fallback_reason;
};

/// Application logic behind the REST interface. Every public method is safe to
/// call from concurrent request handlers.
class StoryBuddyService {
public:
    // Loads the library, config and every persisted transcript. Transcripts that
    // fail replay are skipped and listed in load_problems().
    StoryBuddyService(ServiceOptions options, Entropy entropy);

    const std::vector<std::string>& load_problems() const noexcept { return load_problems_; }

    ApiResponse list_stories() const;
    ApiResponse get_story(const std::string& id) const;
    ApiResponse generate_questions(const std::string& story_id, const nlohmann::json& body);
    ApiResponse edit_question(const std::string& story_id, const std::string& qa_id, const nlohmann::json& body);
    ApiResponse get_preferences() const;
    ApiResponse put_preferences(const nlohmann::json& body);
    ApiResponse create_session(const nlohmann::json& body);
    ApiResponse post_event(const std::string& session_id, const nlohmann::json& body);
    ApiResponse list_sessions() const;
    ApiResponse get_session(const std::string& session_id) const;
    ApiResponse session_dashboard(const std::string& session_id, const std::optional<std::string>& type) const;
    ApiResponse weekly_dashboard(const std::optional<std::string>& year, const std::optional<std::string>& week,
                                 const std::optional<std::string>& type) const;
    ApiResponse speech(const std::string& text) const;

    // Exposed for tests and the CLI.
    std::vector<ResolvedPage> resolve(const Storybook& book, const PreferenceConfig& config);
    const Lexicons& lexicons() const noexcept { return lexicons_; }
    std::shared_ptr<const AnswerMatcher> matcher() const noexcept { return matcher_; }

private:
    struct GeneratedPage {
        std::vector<QAPair> pairs;
        bool fell_back = false;
        std::string fallback_reason;
    };
    struct SessionSlot {
        explicit SessionSlot(Session s) : session(std::move(s)) {}
        mutable std::mutex mutex;
        Session session;
    };

    const std::vector<GeneratedPage>& generated(const Storybook& book, const TypeSet& types);
    PreferenceConfig config_snapshot() const;
    void store_config(PreferenceConfig config);
    std::shared_ptr<SessionSlot> find_slot(const std::string& id) const;
    void persist(const Session& session);
    void write_index() const;
    nlohmann::json questions_response(const Storybook& book, const std::vector<ResolvedPage>& pages,
                                      const TypeSet& types) const;

    ServiceOptions options_;
    Lexicons lexicons_;
    std::shared_ptr<const AnswerMatcher> matcher_;
    Library library_;
    FileStore store_;
    mutable Entropy entropy_;

    mutable std::shared_mutex config_mutex_;
    PreferenceConfig config_;

    std::mutex cache_mutex_;
    std::map<std::pair<std::string, unsigned>, std::vector<GeneratedPage>> cache_;

    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;
    mutable std::mutex index_mutex_;

    std::vector<std::string> load_problems_;
};

}  // namespace storybuddy::service
