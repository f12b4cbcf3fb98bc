// Command-line entry point: run the HTTP service, batch-generate questions for
// one storybook, or print weekly statistics from a data directory.

#include "storybuddy/dashboard.hpp"
#include "storybuddy/error.hpp"
#include "storybuddy/followup.hpp"
#include "storybuddy/remote_generator.hpp"
#include "storybuddy/service/app.hpp"
#include "storybuddy/service/http.hpp"
#include "storybuddy/service/preferences.hpp"
#include "storybuddy/service/store.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sb = storybuddy;
namespace svc = storybuddy::service;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server != nullptr) g_server->stop();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw sb::Error("cannot read '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

sb::TypeSet parse_types(const std::string& list) {
    if (list.empty() || list == "all") return sb::TypeSet::all();
    sb::TypeSet out;
    std::stringstream ss(list);
    std::string name;
    while (std::getline(ss, name, ',')) {
        const auto type = sb::parse_question_type(name);
        if (!type) throw sb::ValidationError("unknown question type '" + name + "'");
        out.insert(*type);
    }
    if (out.empty()) throw sb::ValidationError("no question types given");
    return out;
}

int serve(const std::string& library, const std::string& data, int port, const std::vector<std::string>& speech,
          const std::string& generator, int utc_offset) {
    svc::ServiceOptions options;
    options.library_dir = library;
    options.data_dir = data;
    options.utc_offset_minutes = utc_offset;
    if (!speech.empty()) {
        const std::string& kind = speech.front();
        if (kind == "recorded" && speech.size() == 2) {
            options.speech = std::make_shared<svc::RecordedSpeechClient>(speech[1]);
        } else if (kind == "remote" && speech.size() == 2) {
            options.speech = std::make_shared<svc::RemoteSpeechClient>(speech[1]);
        } else if (kind != "null" || speech.size() != 1) {
            throw sb::ValidationError("--speech takes 'null', 'recorded DIR' or 'remote URL'");
        }
    }
    if (!generator.empty()) options.generator = std::make_shared<sb::HttpQuestionGenerator>(generator);

    svc::StoryBuddyService service(std::move(options), svc::Entropy::from_environment());
    for (const auto& problem : service.load_problems()) std::cerr << "skipped transcript: " << problem << "\n";

    httplib::Server server;
    svc::register_routes(server, service);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    const int bound = port == 0 ? server.bind_to_any_port("127.0.0.1") : (server.bind_to_port("127.0.0.1", port) ? port : -1);
    if (bound < 0) {
        std::cerr << "cannot bind port " << port << "\n";
        return 1;
    }
    std::cout << "listening on 127.0.0.1:" << bound << std::endl;
    server.listen_after_bind();
    return 0;
}

int generate(const std::string& story, const std::string& types, const std::string& out) {
    const sb::Storybook book = sb::parse_storybook(read_file(story));
    const sb::Lexicons lex = sb::Lexicons::load(sb::Lexicons::default_dir());
    const sb::TypeSet enabled = parse_types(types);

    nlohmann::json pages = nlohmann::json::array();
    for (const auto& page : book.pages) {
        const auto result = sb::generate_for_page(book, page.index, enabled, lex);
        nlohmann::json questions = nlohmann::json::array();
        for (const auto& qa : result.pairs) questions.push_back(sb::qa_pair_to_json(qa));
        pages.push_back({{"page_index", page.index},
                         {"questions", questions},
                         {"anchors", sb::anchor_set_to_json(sb::link_followups(page.index, result.pairs, lex.stopwords))}});
    }
    const std::string text =
        nlohmann::json{{"storybook_id", book.id}, {"enabled_types", svc::type_set_to_json(enabled)}, {"pages", pages}}
            .dump(2) +
        "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
    } else {
        std::ofstream(out, std::ios::binary) << text;
    }
    return 0;
}

int stats(const std::string& data, const std::string& week_text, int utc_offset) {
    const sb::IsoWeek week = sb::parse_iso_week(week_text);
    const sb::Lexicons lex = sb::Lexicons::load(sb::Lexicons::default_dir());
    const auto matcher = std::make_shared<sb::AnswerMatcher>(lex);
    const svc::FileStore store(data);

    std::vector<std::string> problems;
    std::vector<sb::SessionStats> in_week;
    for (const auto& doc : store.load_transcripts(&problems)) {
        try {
            const auto transcript = sb::transcript_from_json(doc);
            if (sb::iso_week_of(transcript.started_at, utc_offset) != week) continue;
            in_week.push_back(sb::compute_session_stats(transcript, matcher));
        } catch (const sb::Error& e) {
            problems.push_back(doc.value("session_id", std::string("<unknown>")) + ": " + e.what());
        }
    }
    for (const auto& p : problems) std::cerr << "skipped transcript: " << p << "\n";
    std::cout << sb::weekly_stats_to_json(sb::aggregate_weekly(in_week, week, utc_offset)).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"StoryBuddy interactive storytelling service"};
    app.require_subcommand(1);

    std::string library;
    std::string data;
    int port = 8080;
    std::vector<std::string> speech;
    std::string generator;
    int utc_offset = 0;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--library", library, "Storybook directory")->required()->check(CLI::ExistingDirectory);
    serve_cmd->add_option("--data", data, "Data directory for config and transcripts")->required();
    serve_cmd->add_option("--port", port, "Port to listen on (0 picks a free one)");
    serve_cmd->add_option("--speech", speech, "null | recorded DIR | remote URL")->expected(1, 2);
    serve_cmd->add_option("--generator", generator, "Base URL of a remote question generator");
    serve_cmd->add_option("--utc-offset", utc_offset, "Minutes east of UTC used for week boundaries");

    std::string story;
    std::string types;
    std::string out;
    auto* gen_cmd = app.add_subcommand("generate", "Generate questions for one storybook");
    gen_cmd->add_option("--story", story, "Storybook JSON file")->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("--types", types, "Comma-separated question types (default: all)");
    gen_cmd->add_option("--out", out, "Output file (default: stdout)");

    std::string week;
    auto* stats_cmd = app.add_subcommand("stats", "Print weekly statistics");
    stats_cmd->add_option("--data", data, "Data directory")->required()->check(CLI::ExistingDirectory);
    stats_cmd->add_option("--week", week, "ISO week as YYYY-WW")->required();
    stats_cmd->add_option("--utc-offset", utc_offset, "Minutes east of UTC used for week boundaries");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd) return serve(library, data, port, speech, generator, utc_offset);
        if (*gen_cmd) return generate(story, types, out);
        return stats(data, week, utc_offset);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
