#include "dicomrouter/service/server.hpp"

#include <fstream>
#include <iterator>

#include <httplib.h>
#include <json.hpp>

#include "dicomrouter/image/pipeline.hpp"
#include "dicomrouter/image/png.hpp"

namespace dicomrouter::service {

using nlohmann::json;

namespace {

std::span<const std::uint8_t> body_bytes(const httplib::Request& req) {
    return {reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size()};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

json probs_json(const nn::Probabilities& p) { return std::vector<double>(p.begin(), p.end()); }

json label_json(const std::optional<ReaderLabel>& l) {
    if (!l) return nullptr;
    return {{"reader", l->reader}, {"class", nn::to_string(l->label)}, {"class_code", nn::code(l->label)},
            {"ts", l->ts}};
}

json item_json(const ReviewItem& item) {
    return {{"id", item.id},
            {"probs", probs_json(item.probabilities)},
            {"max_prob", item.max_probability()},
            {"predicted", nn::to_string(item.predicted)},
            {"predicted_code", nn::code(item.predicted)},
            {"state", to_string(item.state())},
            {"round1", label_json(item.round1)},
            {"round2", label_json(item.round2)},
            {"adjudication", label_json(item.adjudication)},
            {"consensus", item.consensus ? json(nn::to_string(*item.consensus)) : json(nullptr)},
            {"consensus_code", item.consensus ? json(nn::code(*item.consensus)) : json(nullptr)},
            {"image_url", "/v1/images/" + item.id + ".png"},
            {"queued_ts", item.queued_ts}};
}

json decision_json(const RoutingDecision& d) {
    json j = json::parse(to_json_line(d.audit_record()));
    j["class_code"] = d.cls ? json(nn::code(*d.cls)) : json(nullptr);
    j["sha256"] = d.sha256;
    if (!d.detail.empty()) j["detail"] = d.detail;
    return j;
}

std::optional<nn::BodyPartClass> class_from_json(const json& v) {
    if (v.is_number_integer()) {
        const int c = v.get<int>();
        if (c < 0 || c >= static_cast<int>(nn::kNumClasses)) return std::nullopt;
        return nn::body_part_from_code(c);
    }
    if (v.is_string()) return nn::parse_body_part(v.get<std::string>());
    return std::nullopt;
}

std::optional<ReviewRound> round_from_json(const json& v) {
    if (v.is_number_integer()) {
        const int r = v.get<int>();
        if (r == 1) return ReviewRound::First;
        if (r == 2) return ReviewRound::Second;
        if (r == 3) return ReviewRound::Adjudication;
        return std::nullopt;
    }
    if (v.is_string() && v.get<std::string>() == "adjudication") return ReviewRound::Adjudication;
    return std::nullopt;
}

}  // namespace

Server::Server(Router& router) : router_(router), http_(std::make_unique<httplib::Server>()) {
    install_routes();
}

Server::~Server() { stop(); }

void Server::install_routes() {
    auto& s = *http_;

    s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
        const auto& token = router_.config().api_token;
        if (!token || req.path == "/healthz") return httplib::Server::HandlerResponse::Unhandled;
        if (req.get_header_value("X-Api-Token") != *token) {
            send_error(res, 401, "missing or invalid API token");
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });

    s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        } catch (...) {
            send_error(res, 500, "unknown error");
        }
    });

    s.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });

    s.Post("/v1/classify", [this](const httplib::Request& req, httplib::Response& res) {
        if (!router_.has_backend()) return send_error(res, 503, "no model loaded");
        if (req.body.empty()) return send_error(res, 400, "empty body");
        try {
            const auto r = router_.classify(body_bytes(req));
            send_json(res, 200,
                      {{"id", r.id},
                       {"class", nn::to_string(r.prediction.cls)},
                       {"class_code", nn::code(r.prediction.cls)},
                       {"probs", probs_json(r.prediction.probabilities)},
                       {"latency_s", r.prediction.latency_s}});
        } catch (const ParseFailure& e) {
            send_error(res, e.not_dicom() ? 415 : 400, e.what());
        } catch (const nn::BackendFailure& e) {
            send_error(res, 500, e.what());
        }
    });

    s.Post("/v1/ingest", [this](const httplib::Request& req, httplib::Response& res) {
        if (!router_.has_backend()) return send_error(res, 503, "no model loaded");
        if (router_.degraded()) return send_error(res, 503, "audit log unavailable; classify-only mode");
        if (req.body.empty()) return send_error(res, 400, "empty body");
        try {
            const auto d = router_.ingest(body_bytes(req));
            int status = 200;
            if (d.parse_error) status = d.not_dicom ? 415 : 400;
            send_json(res, status, decision_json(d));
        } catch (const DiskFull& e) {
            send_error(res, 503, e.what());
        }
    });

    s.Get("/v1/review/queue", [this](const httplib::Request& req, httplib::Response& res) {
        const bool all = req.get_param_value("all") == "1";
        const auto items = all ? router_.review().all_items() : router_.review().open_items();
        json out = json::array();
        for (const auto& item : items) out.push_back(item_json(item));
        send_json(res, 200, out);
    });

    s.Post(R"(/v1/review/([^/]+)/label)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::parse_error&) {
            return send_error(res, 400, "body must be JSON");
        }
        if (!body.is_object() || !body.contains("reader") || !body["reader"].is_string() ||
            !body.contains("round") || !body.contains("class")) {
            return send_error(res, 400, "expected {reader, round, class}");
        }
        const auto round = round_from_json(body["round"]);
        const auto cls = class_from_json(body["class"]);
        if (!round) return send_error(res, 400, "round must be 1, 2 or \"adjudication\"");
        if (!cls) return send_error(res, 400, "class must be a code 0..4 or a class name");
        try {
            const auto item = router_.review().submit(id, body["reader"].get<std::string>(), *round, *cls);
            send_json(res, 200, item_json(item));
        } catch (const ReviewNotFound& e) {
            send_error(res, 404, e.what());
        } catch (const ReviewConflict& e) {
            send_error(res, 409, e.what());
        } catch (const std::invalid_argument& e) {
            send_error(res, 400, e.what());
        }
    });

    s.Get(R"(/v1/images/([^/]+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto path = router_.stored_file(id);
        if (!path) return send_error(res, 404, "unknown id '" + id + "'");
        std::ifstream in(*path, std::ios::binary);
        if (!in) return send_error(res, 404, "stored file for '" + id + "' is gone");
        const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                              std::istreambuf_iterator<char>());
        try {
            const auto img = image::preprocess(bytes, image::kModelInputSize);
            const auto png = image::export_png(img);
            res.set_content(std::string(png.begin(), png.end()), "image/png");
        } catch (const std::exception& e) {
            send_error(res, 415, std::string("cannot render: ") + e.what());
        }
    });

    s.Get("/v1/audit", [this](const httplib::Request& req, httplib::Response& res) {
        const std::string since = req.get_param_value("since");
        json out = json::array();
        for (const auto& r : replay_audit(router_.config().audit_log).records) {
            if (!since.empty() && !(r.ts > since)) continue;
            out.push_back(json::parse(to_json_line(r)));
        }
        send_json(res, 200, out);
    });
}

bool Server::listen(const std::string& host, int port) { return http_->listen(host, port); }

int Server::bind_to_any_port(const std::string& host) { return http_->bind_to_any_port(host); }

bool Server::listen_after_bind() { return http_->listen_after_bind(); }

void Server::stop() {
    if (http_) http_->stop();
}

bool Server::is_running() const { return http_->is_running(); }

void Server::wait_until_ready() const { http_->wait_until_ready(); }

}  // namespace dicomrouter::service
