#include <httplib.h>

#include <regex>

#include "saltdialog/dst.hpp"
#include "saltdialog/errors.hpp"

namespace saltdialog {

namespace {

struct Endpoint {
    std::string origin; // scheme://host[:port]
    std::string path;   // prefix without trailing slash
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re))
        throw PredictorUnavailable("invalid predictor endpoint '" + url + "'");
    std::string path = m[2].matched ? m[2].str() : "";
    while (!path.empty() && path.back() == '/')
        path.pop_back();
    return {m[1].str(), path};
}

} // namespace

PredictorResponse remote_predict(const RemoteConfig& cfg, const PredictorRequest& request) {
    const Endpoint ep = split_endpoint(cfg.endpoint);
    httplib::Client client(ep.origin);
    if (!client.is_valid())
        throw PredictorUnavailable("unsupported predictor endpoint '" + cfg.endpoint + "'");
    const auto secs = static_cast<time_t>(cfg.timeout_seconds);
    const auto usecs = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    const std::string body = request_to_json(request).dump();
    std::string last_error;
    for (int attempt = 0; attempt <= std::max(0, cfg.retries); ++attempt) {
        auto res = client.Post(ep.path + "/predict", body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw PredictorUnavailable("predictor answered HTTP " + std::to_string(res->status));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::exception& e) {
            throw BeliefParseError(std::string("predictor response is not JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("belief") || !j["belief"].is_string())
            throw BeliefParseError("predictor response lacks a 'belief' string");
        PredictorResponse out{j["belief"].get<std::string>()};
        parse_belief_report(out.belief);
        return out;
    }
    throw PredictorUnavailable("predictor at " + cfg.endpoint + " unreachable: " + last_error);
}

} // namespace saltdialog
