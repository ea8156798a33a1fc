#include <httplib.h>

#include "saltdialog/errors.hpp"
#include "saltdialog/service.hpp"

namespace saltdialog {

struct HttpService::Impl {
    DialogManager& manager;
    HttpConfig config;
    httplib::Server server;
    int port = -1;

    Impl(DialogManager& m, HttpConfig c) : manager(m), config(std::move(c)) {}
};

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

// Runs `fn`, mapping library errors to HTTP statuses.
template <typename Fn>
void guarded(httplib::Response& res, Fn fn) {
    try {
        fn();
    } catch (const SessionNotFound& e) {
        send_error(res, 404, e.what());
    } catch (const SessionCompleted& e) {
        send_error(res, 409, e.what());
    } catch (const SessionExpired& e) {
        send_error(res, 410, e.what());
    } catch (const SessionLimitReached& e) {
        send_error(res, 503, e.what());
    } catch (const PredictorUnavailable& e) {
        send_error(res, 503, e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, e.what());
    }
}

} // namespace

HttpService::HttpService(DialogManager& manager, HttpConfig config)
    : impl_(std::make_unique<Impl>(manager, std::move(config))) {
    auto& svr = impl_->server;
    const std::string origin = impl_->config.cors_origin;

    // httplib's default adds SO_REUSEPORT, which lets a second server share a
    // port that is already taken.
    svr.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    svr.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        if (!origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
    });
    svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    svr.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}, {"sessions", impl_->manager.session_count()}});
    });

    svr.Post("/session", [this](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, {{"id", impl_->manager.create_session()}}); });
    });

    svr.Post(R"(/session/([^/]+)/message)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            send_error(res, 400, "request body must be JSON");
            return;
        }
        if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
            send_error(res, 400, "request body must be {\"text\": \"...\"}");
            return;
        }
        const std::string text = body["text"].get<std::string>();
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
            send_error(res, 400, "message text is empty");
            return;
        }
        guarded(res, [&] { send_json(res, 200, impl_->manager.handle_message(id, text).to_json()); });
    });

    svr.Get(R"(/session/([^/]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        guarded(res, [&] { send_json(res, 200, impl_->manager.get_state(id).to_json()); });
    });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind() {
    auto& svr = impl_->server;
    if (impl_->config.port == 0) {
        impl_->port = svr.bind_to_any_port(impl_->config.host);
    } else if (svr.bind_to_port(impl_->config.host, impl_->config.port)) {
        impl_->port = impl_->config.port;
    } else {
        impl_->port = -1;
    }
    if (impl_->port < 0)
        throw ConfigError("cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
    return impl_->port;
}

void HttpService::serve() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
    if (impl_ && impl_->server.is_running())
        impl_->server.stop();
}

int HttpService::port() const { return impl_->port; }

} // namespace saltdialog
