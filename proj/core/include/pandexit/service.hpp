#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pandexit/scenario.hpp"
#include "pandexit/solver.hpp"

namespace pandexit {

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

/// Stateless request handlers behind the HTTP endpoints. Every call builds
/// its own solver state, so one instance can serve concurrent requests.
class ApiService {
  public:
    static constexpr std::size_t kMaxBodyBytes = 1 << 20;
    static constexpr std::size_t kMaxTrajectoryNodes = 2000;
    /// Upper bound on grid-node sweeps accepted for interactive requests.
    /// One unit is ~1 microsecond, so the worst case is about ten seconds.
    static constexpr double kInteractiveWorkBudget = 1e7;

    ApiResponse health() const;
    ApiResponse solve(std::string_view body) const;
    ApiResponse oracle(std::string_view body) const;
};

/// Uniform decimation to at most `cap` nodes, always keeping the first and
/// last node.
std::vector<TrajectoryNode> decimate(const std::vector<TrajectoryNode>& nodes, std::size_t cap);

/// Rough count of grid-node sweeps a request would need.
double estimated_solve_work(const Scenario& s);
double estimated_oracle_work(const Scenario& s, std::size_t intervals);

/// {"errors":[{"field":..,"message":..}]}
nlohmann::json errors_json(const std::vector<FieldError>& errors);

/// HTTP/1.1 front end for ApiService, optionally serving a static bundle
/// under "/".
class HttpServer {
  public:
    explicit HttpServer(std::optional<std::string> static_dir = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the port,
    /// or -1 on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. Requires a successful bind().
    bool listen();
    void stop();
    /// Blocks until the server accepts connections.
    void wait_until_ready() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace pandexit
