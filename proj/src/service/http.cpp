#include "storybuddy/service/http.hpp"

#include <httplib.h>

namespace storybuddy::service {

using nlohmann::json;

namespace {

void send(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    if (r.raw) {
        res.set_content(*r.raw, r.content_type);
    } else {
        res.set_content(r.body.dump(), "application/json");
    }
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
}

// Parses the request body; an empty body reads as an empty object.
std::optional<json> body_of(const httplib::Request& req, httplib::Response& res) {
    if (req.body.empty()) return json::object();
    auto doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded()) {
        send(res, error_response(400, "invalid_json", "request body is not valid JSON"));
        return std::nullopt;
    }
    return doc;
}

}  // namespace

void register_routes(httplib::Server& server, StoryBuddyService& service) {
    server.Get("/stories", [&](const httplib::Request&, httplib::Response& res) { send(res, service.list_stories()); });
    server.Get(R"(/stories/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_story(req.matches[1]));
    });
    server.Post(R"(/stories/([^/]+)/questions)", [&](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_of(req, res)) send(res, service.generate_questions(req.matches[1], *body));
    });
    server.Put(R"(/stories/([^/]+)/questions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_of(req, res)) send(res, service.edit_question(req.matches[1], req.matches[2], *body));
    });

    server.Get("/preferences", [&](const httplib::Request&, httplib::Response& res) {
        send(res, service.get_preferences());
    });
    server.Put("/preferences", [&](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_of(req, res)) send(res, service.put_preferences(*body));
    });

    server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_of(req, res)) send(res, service.create_session(*body));
    });
    server.Get("/sessions", [&](const httplib::Request&, httplib::Response& res) { send(res, service.list_sessions()); });
    server.Get(R"(/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.get_session(req.matches[1]));
    });
    server.Post(R"(/sessions/([^/]+)/events)", [&](const httplib::Request& req, httplib::Response& res) {
        if (auto body = body_of(req, res)) send(res, service.post_event(req.matches[1], *body));
    });

    server.Get(R"(/dashboard/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.session_dashboard(req.matches[1], param(req, "type")));
    });
    server.Get("/dashboard/weekly", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.weekly_dashboard(param(req, "year"), param(req, "week"), param(req, "type")));
    });

    server.Get("/speech", [&](const httplib::Request& req, httplib::Response& res) {
        send(res, service.speech(req.get_param_value("text")));
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        const int status = res.status;
        send(res, error_response(status, status == 404 ? "not_found" : "http_error",
                                 "no route for this request"));
    });
}

}  // namespace storybuddy::service
