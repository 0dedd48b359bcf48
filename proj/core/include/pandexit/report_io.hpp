#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pandexit/diagnostics.hpp"
#include "pandexit/oracle.hpp"
#include "pandexit/solver.hpp"

namespace pandexit {

/// Exact CSV header of trajectory files.
inline constexpr const char* kTrajectoryCsvHeader = "t,q,h,u,a,lambda1,lambda2,lambda3,d,integrand";

/// One row per node, every value printed with 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// Parses a file produced by write_trajectory_csv. Throws std::runtime_error
/// on a wrong header or malformed row.
Trajectory read_trajectory_csv(std::istream& in);

nlohmann::json to_json(const TrajectoryNode& node);
nlohmann::json to_json(const Trajectory& trajectory);
nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const OracleResult& result);
nlohmann::json to_json(const ReboundReport& report, bool include_samples = false);
nlohmann::json to_json(const LyapunovEstimate& estimate);

/// Summary of the Hessian check: flag, counts, first violation and the
/// per-node data at t = 0 for reference.
nlohmann::json summary_json(const HessianReport& report);

struct Diagnostics {
    HessianReport hessian;
    ReboundReport rebound;
    std::optional<LyapunovEstimate> lyapunov;
    std::string lyapunov_error;
};

/// Runs every diagnostic on a solved trajectory. The Lyapunov estimate uses
/// the autonomous system from the trajectory's first node over the horizon
/// with one-day renormalization; failures are recorded, not thrown.
Diagnostics run_diagnostics(const Trajectory& trajectory, const Scenario& s);

nlohmann::json to_json(const Diagnostics& diagnostics);

}  // namespace pandexit
