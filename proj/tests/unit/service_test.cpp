#include "storybuddy/service/app.hpp"
#include "storybuddy/service/http.hpp"

#include "storybuddy/error.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

namespace sb = storybuddy;
namespace svc = storybuddy::service;
using nlohmann::json;

namespace {

svc::ServiceOptions options_for(const std::filesystem::path& data) {
    svc::ServiceOptions o;
    o.library_dir = sbtest::source_dir() / "library";
    o.data_dir = data;
    return o;
}

class ServiceTest : public ::testing::Test {
protected:
    std::unique_ptr<svc::StoryBuddyService> make(svc::ServiceOptions o) {
        return std::make_unique<svc::StoryBuddyService>(std::move(o), svc::Entropy::seeded(7));
    }
    std::unique_ptr<svc::StoryBuddyService> make() { return make(options_for(dir.path())); }

    sbtest::TempDir dir;
};

TEST_F(ServiceTest, ListsAndServesStories) {
    auto s = make();
    const auto list = s->list_stories().body.at("stories");
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[0]["storybook_id"], "three-bears");
    EXPECT_EQ(list[0]["page_count"], 6);
    EXPECT_TRUE(list[1]["cover"].is_string() || list[1]["cover"].is_null());

    const auto story = s->get_story("three-bears");
    ASSERT_TRUE(story.raw);
    EXPECT_EQ(*story.raw, sb::serialize_storybook(sbtest::fixture_book("three-bears")));
    EXPECT_EQ(s->get_story("nope").status, 404);
    EXPECT_EQ(s->get_story("nope").body["error"], "story_not_found");
}

TEST_F(ServiceTest, GeneratesWithDefaultSelection) {
    auto s = make();
    const auto r = s->generate_questions("three-bears", json::object());
    ASSERT_EQ(r.status, 200);
    const auto& page1 = r.body.at("pages").at(0);
    EXPECT_EQ(page1["default_selection"], json::array({"p1-4", "p1-5"}));
    EXPECT_EQ(page1["selected"], page1["default_selection"]);
    for (const auto& q : page1["questions"]) EXPECT_EQ(q["is_followup"], q["id"] == "p1-5");
    EXPECT_EQ(r.body["enabled_types"].size(), 7u);
}

TEST_F(ServiceTest, TypeFilterAndEmptySet) {
    auto s = make();
    const auto r = s->generate_questions("three-bears", {{"enabled_types", {"Character"}}});
    ASSERT_EQ(r.status, 200);
    for (const auto& page : r.body["pages"]) {
        for (const auto& q : page["questions"]) EXPECT_EQ(q["type"], "Character");
    }
    EXPECT_EQ(s->generate_questions("three-bears", {{"enabled_types", json::array()}}).status, 422);
    EXPECT_EQ(s->generate_questions("three-bears", {{"enabled_types", {"Nonsense"}}}).status, 422);
    EXPECT_EQ(s->generate_questions("missing", json::object()).status, 404);
}

TEST_F(ServiceTest, EditQuestionPersistsAndRejudges) {
    {
        auto s = make();
        const auto r = s->edit_question("three-bears", "p1-4", {{"answer_text", "the three bears"}});
        ASSERT_EQ(r.status, 200) << r.body.dump();
        EXPECT_EQ(r.body["id"], "p1-4");
        EXPECT_EQ(r.body["source"], "ParentEdited");
        const auto phrases = r.body["accepted_phrases"].get<std::vector<std::string>>();
        EXPECT_NE(std::find(phrases.begin(), phrases.end(), "i think the 3 bears"), phrases.end());

        EXPECT_EQ(s->edit_question("three-bears", "p1-4", {{"question_text", "No mark"}}).status, 422);
        EXPECT_EQ(s->edit_question("three-bears", "p1-4", {{"answer_text", "?!"}}).status, 422);
        EXPECT_EQ(s->edit_question("three-bears", "p9-9", {{"answer_text", "x"}}).status, 404);
        EXPECT_EQ(s->edit_question("three-bears", "p1-4", {{"answer_text", 5}}).status, 400);
    }
    auto reopened = make();
    const auto page1 = reopened->generate_questions("three-bears", json::object()).body["pages"][0];
    bool found = false;
    for (const auto& q : page1["questions"]) {
        if (q["id"] == "p1-4") {
            found = true;
            EXPECT_EQ(q["answer_text"], "the three bears");
        }
    }
    EXPECT_TRUE(found);

    auto created = reopened->create_session({{"storybook_id", "three-bears"}, {"mode", "BotReading"}});
    const std::string id = created.body["session_id"];
    const auto judged = reopened->post_event(id, {{"kind", "ChildUtterance"}, {"text", "It may be 3 bears"}});
    EXPECT_EQ(judged.body["verdict"], "Correct");
}

TEST_F(ServiceTest, PreferencesValidateSelections) {
    auto s = make();
    json prefs = {{"enabled_types", {"Character", "Action", "Outcome"}},
                  {"per_story_overrides", {{"three-bears", {{"selected", {{"1", {"p1-2"}}}}}}}}};
    auto bad = prefs;
    bad["per_story_overrides"]["three-bears"]["selected"]["1"] = {"p1-99"};
    EXPECT_EQ(s->put_preferences(bad).status, 422);
    bad = prefs;
    bad["per_story_overrides"]["three-bears"]["selected"]["9"] = {"p1-2"};
    EXPECT_EQ(s->put_preferences(bad).status, 422);
    bad = prefs;
    bad["per_story_overrides"]["unknown"] = {{"selected", json::object()}};
    EXPECT_EQ(s->put_preferences(bad).status, 422);
    bad = prefs;
    bad["enabled_types"] = json::array();
    EXPECT_EQ(s->put_preferences(bad).status, 422);

    const auto put = s->put_preferences(prefs);
    ASSERT_EQ(put.status, 200) << put.body.dump();
    EXPECT_EQ(s->get_preferences().body, put.body);
    EXPECT_EQ(s->generate_questions("three-bears", json::object()).body["pages"][0]["selected"], json::array({"p1-2"}));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "config.json"));
}

TEST_F(ServiceTest, BotSessionFlowAndErrors) {
    auto s = make();
    const auto created = s->create_session({{"storybook_id", "three-bears"}, {"mode", "BotReading"}});
    ASSERT_EQ(created.status, 201);
    const std::string id = created.body["session_id"];
    EXPECT_EQ(id.size(), 18u);
    const auto& u = created.body["utterances"];
    EXPECT_EQ(u.front(), sb::kGreeting);
    EXPECT_EQ(u.back(), "Who stirred the big pot of porridge?");
    EXPECT_EQ(created.body["state"]["phase"], "AwaitingAnswer");

    const auto wrong = s->post_event(id, {{"kind", "ChildUtterance"}, {"text", "Papa Bear"}});
    EXPECT_EQ(wrong.body["verdict"], "Incorrect");
    EXPECT_EQ(wrong.body["options"], json::array({"TryAgain", "TryAnotherQuestion", "MoveToNextPage"}));

    const auto turn = s->post_event(id, {{"kind", "PageTurn"}, {"to_index", 2}});
    EXPECT_EQ(turn.status, 409);
    EXPECT_EQ(turn.body["event"]["kind"], "PageTurn");
    EXPECT_EQ(s->post_event(id, {{"kind", "OptionChosen"}, {"option", "Sideways"}}).status, 422);
    EXPECT_EQ(s->post_event(id, {{"kind", "Dance"}}).status, 422);
    EXPECT_EQ(s->post_event(id, {{"text", "x"}}).status, 400);
    EXPECT_EQ(s->post_event("s-nope", {{"kind", "EndSession"}}).status, 404);

    const auto next = s->post_event(id, {{"kind", "OptionChosen"}, {"option", "TryAnotherQuestion"}});
    EXPECT_EQ(next.body["state"]["active_qa"], "p1-5");

    EXPECT_EQ(s->create_session({{"storybook_id", "three-bears"}, {"mode", "Solo"}}).status, 422);
    EXPECT_EQ(s->create_session({{"storybook_id", "nope"}, {"mode", "CoReading"}}).status, 404);
    EXPECT_EQ(s->create_session({{"mode", "CoReading"}}).status, 400);
}

TEST_F(ServiceTest, CoReadingSessionAndDashboards) {
    auto s = make();
    const std::string id = s->create_session({{"storybook_id", "three-bears"}, {"mode", "CoReading"}}).body["session_id"];
    const auto judged = s->post_event(id, {{"kind", "ParentJudge"}, {"qa_id", "p1-4"}, {"correct", true}});
    ASSERT_EQ(judged.status, 200);
    EXPECT_EQ(judged.body["followup"]["id"], "p1-5");
    s->post_event(id, {{"kind", "ParentJudge"}, {"qa_id", "p1-5"}, {"correct", false}});
    s->post_event(id, {{"kind", "PageTurn"}, {"to_index", 6}});
    const auto end = s->post_event(id, {{"kind", "EndSession"}});
    EXPECT_EQ(end.body["utterances"], json::array({sb::kClosing}));
    EXPECT_EQ(s->post_event(id, {{"kind", "EndSession"}}).status, 409);

    const auto dash = s->session_dashboard(id, std::nullopt);
    ASSERT_EQ(dash.status, 200);
    EXPECT_EQ(dash.body["accuracy"], sb::rational_to_json(sb::Rational(1, 2)));
    EXPECT_EQ(s->session_dashboard(id, std::string("Bogus")).status, 422);
    EXPECT_EQ(s->session_dashboard("nope", std::nullopt).status, 404);

    const auto weekly = s->weekly_dashboard("2026", "2", std::nullopt);
    ASSERT_EQ(weekly.status, 200);
    EXPECT_EQ(weekly.body["sessions"], json::array({id}));
    EXPECT_EQ(s->weekly_dashboard("2026", "3", std::nullopt).body["sessions"], json::array());
    EXPECT_EQ(s->weekly_dashboard("2025", "53", std::nullopt).status, 422);
    EXPECT_EQ(s->weekly_dashboard("2026", "x", std::nullopt).status, 422);
    EXPECT_EQ(s->weekly_dashboard(std::nullopt, "2", std::nullopt).status, 422);
}

TEST_F(ServiceTest, SessionsSurviveRestart) {
    std::string id;
    json before;
    {
        auto s = make();
        id = s->create_session({{"storybook_id", "three-bears"}, {"mode", "BotReading"}}).body["session_id"];
        s->post_event(id, {{"kind", "ChildUtterance"}, {"text", "Baby Bear"}});
        before = s->get_session(id).body;
    }
    auto s = make();
    EXPECT_TRUE(s->load_problems().empty());
    EXPECT_EQ(s->get_session(id).body, before);
    EXPECT_EQ(s->list_sessions().body["sessions"].size(), 1u);
    // The seeded id sequence restarts, so the next id must skip the existing one.
    const std::string second = s->create_session({{"storybook_id", "three-bears"}, {"mode", "BotReading"}}).body["session_id"];
    EXPECT_NE(second, id);
    const auto index = json::parse(sbtest::read_file(dir.path() / "sessions" / "index.json"));
    EXPECT_EQ(index.size(), 2u);
}

TEST_F(ServiceTest, CorruptTranscriptIsReportedAndSkipped) {
    std::string id;
    {
        auto s = make();
        id = s->create_session({{"storybook_id", "three-bears"}, {"mode", "BotReading"}}).body["session_id"];
    }
    const auto path = dir.path() / "sessions" / (id + ".json");
    auto doc = json::parse(sbtest::read_file(path));
    doc["events"][0]["text"] = "Hello there";
    std::ofstream(path) << doc.dump();
    std::ofstream(dir.path() / "sessions" / "garbage.json") << "{not json";

    auto s = make();
    EXPECT_EQ(s->load_problems().size(), 2u);
    EXPECT_EQ(s->get_session(id).status, 404);
}

TEST_F(ServiceTest, SpeechClients) {
    auto s = make();
    const auto silent = s->speech("hello");
    EXPECT_EQ(silent.status, 200);
    EXPECT_EQ(silent.raw, "");

    sbtest::TempDir audio;
    std::ofstream(audio.path() / "manifest.json") << R"({"hello": "hello.wav"})";
    std::ofstream(audio.path() / "hello.wav", std::ios::binary) << "RIFFdata";
    auto o = options_for(dir.path());
    o.speech = std::make_shared<svc::RecordedSpeechClient>(audio.path());
    auto recorded = make(o);
    const auto hit = recorded->speech("hello");
    EXPECT_EQ(hit.raw, "RIFFdata");
    EXPECT_EQ(hit.content_type, "audio/wav");
    EXPECT_EQ(recorded->speech("goodbye").status, 404);

    o.speech = std::make_shared<svc::RemoteSpeechClient>("http://127.0.0.1:1", std::chrono::milliseconds(300));
    EXPECT_EQ(make(o)->speech("hello").status, 502);

    httplib::Server tts;
    tts.Post("/synthesize", [](const httplib::Request& req, httplib::Response& res) {
        res.set_content("MP3:" + json::parse(req.body).at("text").get<std::string>(), "audio/mpeg");
    });
    const int port = tts.bind_to_any_port("127.0.0.1");
    std::thread th([&] { tts.listen_after_bind(); });
    tts.wait_until_ready();
    o.speech = std::make_shared<svc::RemoteSpeechClient>("http://127.0.0.1:" + std::to_string(port));
    const auto remote = make(o)->speech("hi");
    tts.stop();
    th.join();
    EXPECT_EQ(remote.raw, "MP3:hi");
    EXPECT_EQ(remote.content_type, "audio/mpeg");
}

TEST_F(ServiceTest, ConcurrentSessionsGetDistinctIds) {
    auto s = make();
    std::vector<std::string> ids(16);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        threads.emplace_back([&, i] {
            const auto r = s->create_session({{"storybook_id", "ugly-duckling"}, {"mode", "BotReading"}});
            ids[i] = r.body.value("session_id", "");
            s->post_event(ids[i], {{"kind", "ChildUtterance"}, {"text", "Mother Duck"}});
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
    auto reopened = make();
    EXPECT_TRUE(reopened->load_problems().empty());
    EXPECT_EQ(reopened->list_sessions().body["sessions"].size(), ids.size());
}

TEST_F(ServiceTest, HttpRoutes) {
    auto s = make();
    httplib::Server server;
    svc::register_routes(server, *s);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client c("127.0.0.1", port);
    const auto stories = c.Get("/stories");
    ASSERT_TRUE(stories);
    EXPECT_EQ(stories->status, 200);
    EXPECT_EQ(stories->get_header_value("Content-Type"), "application/json");

    const auto bad = c.Post("/sessions", "{oops", "application/json");
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(json::parse(bad->body)["error"], "invalid_json");

    const auto missing = c.Get("/no/such/route");
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(json::parse(missing->body)["error"], "not_found");

    const auto created = c.Post("/sessions", R"({"storybook_id":"three-bears","mode":"CoReading"})", "application/json");
    EXPECT_EQ(created->status, 201);
    const std::string id = json::parse(created->body)["session_id"];
    EXPECT_EQ(c.Post("/sessions/" + id + "/events", R"({"kind":"PageTurn","to_index":3})", "application/json")->status, 200);
    EXPECT_EQ(c.Get("/dashboard/weekly?year=2026&week=2&type=Character")->status, 200);
    EXPECT_EQ(c.Get("/dashboard/sessions/" + id)->status, 200);
    EXPECT_EQ(c.Put("/preferences", R"({"enabled_types":["Feeling"]})", "application/json")->status, 200);
    EXPECT_EQ(c.Put("/stories/three-bears/questions/p1-1", R"({"answer_text":"bears"})", "application/json")->status, 404);
    EXPECT_EQ(c.Get("/speech?text=hi")->status, 200);

    server.stop();
    th.join();
}

}  // namespace
