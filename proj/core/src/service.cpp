#include "pandexit/service.hpp"

#include <cmath>

#include <httplib.h>

#include "pandexit/oracle.hpp"
#include "pandexit/report_io.hpp"
#include "pandexit/version.hpp"

namespace pandexit {

using nlohmann::json;

json errors_json(const std::vector<FieldError>& errors) {
    json list = json::array();
    for (const auto& e : errors) list.push_back({{"field", e.field}, {"message", e.message}});
    return {{"errors", std::move(list)}};
}

std::vector<TrajectoryNode> decimate(const std::vector<TrajectoryNode>& nodes, std::size_t cap) {
    if (nodes.size() <= cap || cap < 2) return nodes;
    const std::size_t stride = (nodes.size() - 1 + (cap - 1) - 1) / (cap - 1);
    std::vector<TrajectoryNode> out;
    out.reserve(cap);
    for (std::size_t i = 0; i + 1 < nodes.size(); i += stride) out.push_back(nodes[i]);
    out.push_back(nodes.back());
    return out;
}

double estimated_solve_work(const Scenario& s) {
    const double nodes = std::ceil(s.horizon_days / s.numerics.step_days) + 1.0;
    if (s.numerics.adjoint_convention == AdjointConvention::paper) {
        // Scan plus bisection passes, each with a root solve per RK4 stage.
        return nodes * (22.0 + 60.0) * 4.0;
    }
    return nodes * static_cast<double>(s.numerics.max_iters);
}

double estimated_oracle_work(const Scenario& s, std::size_t intervals) {
    const double nodes = std::ceil(s.horizon_days / s.numerics.step_days) + 1.0;
    // Three restarts of ~20 gradient steps, 2N + 4 scores each. A score step
    // has no root solve and costs about a quarter of a sweep node.
    return nodes * (2.0 * static_cast<double>(intervals) + 4.0) * 3.0 * 20.0 / 4.0;
}

namespace {

ApiResponse bad_request(std::vector<FieldError> errors, int status = 400) {
    return {status, errors_json(errors)};
}

std::optional<ApiResponse> check_body(std::string_view body, json& parsed) {
    if (body.size() > ApiService::kMaxBodyBytes) {
        return bad_request({{"body", "request body exceeds 1 MiB"}}, 413);
    }
    parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) return bad_request({{"body", "malformed JSON"}});
    return std::nullopt;
}

}  // namespace

ApiResponse ApiService::health() const {
    return {200, {{"status", "ok"}, {"version", kVersion}}};
}

ApiResponse ApiService::solve(std::string_view body) const {
    json doc;
    if (auto err = check_body(body, doc)) return *err;
    auto validated = validate(doc);
    if (!validated.ok()) return bad_request(validated.errors);
    const Scenario& s = *validated.scenario;
    if (estimated_solve_work(s) > kInteractiveWorkBudget) {
        return bad_request({{"numerics.step_days", "scenario too large for interactive use"}});
    }

    const SolveResult result = pandexit::solve(s);
    json trajectory = to_json(result.trajectory);
    json nodes = json::array();
    for (const auto& n : decimate(result.trajectory.nodes, kMaxTrajectoryNodes)) {
        nodes.push_back(to_json(n));
    }
    trajectory["nodes"] = std::move(nodes);
    trajectory["full_node_count"] = result.trajectory.nodes.size();

    json diagnostics = nullptr;
    if (!result.trajectory.nodes.empty()) diagnostics = to_json(run_diagnostics(result.trajectory, s));
    return {200,
            {{"scenario_digest", scenario_digest(s)},
             {"trajectory", std::move(trajectory)},
             {"report", to_json(result.report)},
             {"diagnostics", std::move(diagnostics)}}};
}

ApiResponse ApiService::oracle(std::string_view body) const {
    json doc;
    if (auto err = check_body(body, doc)) return *err;
    if (!doc.is_object()) return bad_request({{"body", "expected {\"scenario\":..., \"N\":...}"}});

    std::vector<FieldError> errors;
    std::optional<Scenario> scenario;
    if (!doc.contains("scenario")) {
        errors.push_back({"scenario", "missing field"});
    } else {
        auto validated = validate(doc["scenario"]);
        for (auto e : validated.errors) errors.push_back({"scenario." + e.field, e.message});
        scenario = validated.scenario;
    }
    std::size_t intervals = 0;
    if (!doc.contains("N")) {
        errors.push_back({"N", "missing field"});
    } else if (!doc["N"].is_number_integer() || doc["N"].get<long long>() < 1) {
        errors.push_back({"N", "N must be a positive integer"});
    } else {
        intervals = static_cast<std::size_t>(doc["N"].get<long long>());
    }
    std::optional<double> reference;
    if (doc.contains("reference_J")) {
        if (doc["reference_J"].is_number()) {
            reference = doc["reference_J"].get<double>();
        } else {
            errors.push_back({"reference_J", "must be a number"});
        }
    }
    if (!errors.empty()) return bad_request(errors);
    if (estimated_oracle_work(*scenario, intervals) > kInteractiveWorkBudget) {
        return bad_request({{"N", "scenario too large for interactive use"}});
    }

    const OracleResult result = pandexit::optimize(*scenario, intervals);
    json out = to_json(result);
    out["iterations"] = result.iterations;
    out["scenario_digest"] = scenario_digest(*scenario);
    if (reference) {
        out["reference_J"] = *reference;
        out["J_gap"] = result.objective - *reference;
        out["J_gap_relative"] =
            std::abs(result.objective - *reference) / std::max(std::abs(*reference), 1e-300);
    }
    return {200, std::move(out)};
}

struct HttpServer::Impl {
    httplib::Server server;
    ApiService api;
};

HttpServer::HttpServer(std::optional<std::string> static_dir) : impl_(std::make_unique<Impl>()) {
    auto& srv = impl_->server;
    // Oversized bodies are answered by the handlers with a JSON 413.
    srv.set_payload_max_length(8 * ApiService::kMaxBodyBytes);
    auto reply = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    const ApiService* api = &impl_->api;
    srv.Get("/api/v1/health",
            [api, reply](const httplib::Request&, httplib::Response& res) { reply(res, api->health()); });
    srv.Post("/api/v1/solve", [api, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, api->solve(req.body));
    });
    srv.Post("/api/v1/oracle", [api, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, api->oracle(req.body));
    });
    if (static_dir) srv.set_mount_point("/", *static_dir);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace pandexit
