#include "pandexit/report_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pandexit {

using nlohmann::json;

namespace {

void put(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << kTrajectoryCsvHeader << '\n';
    for (const auto& n : trajectory.nodes) {
        const double row[] = {n.t,       n.q,       n.h,       n.u, n.a,
                              n.lambda1, n.lambda2, n.lambda3, n.d, n.integrand};
        for (std::size_t i = 0; i < std::size(row); ++i) {
            if (i) out << ',';
            put(out, row[i]);
        }
        out << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trajectory CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrajectoryCsvHeader) {
        throw std::runtime_error("trajectory CSV header must be '" +
                                 std::string(kTrajectoryCsvHeader) + "'");
    }
    Trajectory traj;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream fields(line);
        double v[10];
        std::string cell;
        std::size_t k = 0;
        while (std::getline(fields, cell, ',')) {
            if (k >= 10) break;
            try {
                std::size_t used = 0;
                v[k] = std::stod(cell, &used);
                while (used < cell.size() && (cell[used] == '\r' || cell[used] == ' ')) ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw std::runtime_error("trajectory CSV row " + std::to_string(row) +
                                         ": bad number '" + cell + "'");
            }
            ++k;
        }
        if (k != 10) {
            throw std::runtime_error("trajectory CSV row " + std::to_string(row) +
                                     ": expected 10 columns");
        }
        traj.nodes.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
    }
    if (traj.nodes.size() >= 2) traj.step_days = traj.nodes[1].t - traj.nodes[0].t;
    return traj;
}

json to_json(const TrajectoryNode& n) {
    return {{"t", n.t},           {"q", n.q},
            {"h", n.h},           {"u", n.u},
            {"a", n.a},           {"lambda1", n.lambda1},
            {"lambda2", n.lambda2}, {"lambda3", n.lambda3},
            {"d", n.d},           {"integrand", n.integrand}};
}

json to_json(const Trajectory& trajectory) {
    json nodes = json::array();
    for (const auto& n : trajectory.nodes) nodes.push_back(to_json(n));
    return {{"step_days", trajectory.step_days},
            {"scenario_digest", trajectory.scenario_digest},
            {"nodes", std::move(nodes)}};
}

json to_json(const SolveReport& r) {
    json j = {
        {"convention", std::string(to_string(r.convention))},
        {"J", r.objective},
        {"converged", r.converged},
        {"iterations", r.iterations},
        {"terminal_costate_residuals", r.terminal_costate_residuals},
        {"lambda_positivity_violated", r.lambda_positivity_violated},
        {"hessian_negative_semidefinite", r.hessian_negative_semidefinite},
        {"warnings", r.warnings},
        {"lambda1_initial", r.lambda1_initial},
    };
    if (r.convention == AdjointConvention::textbook) {
        j["final_change"] = r.final_change;
        j["final_relaxation"] = r.final_relaxation;
        j["change_history"] = r.change_history;
    } else {
        json curve = json::array();
        for (const auto& [x, res] : r.residual_curve) {
            curve.push_back({{"lambda1_0", x},
                             {"lambda1_T", std::isfinite(res) ? json(res) : json(nullptr)}});
        }
        j["residual_curve"] = std::move(curve);
    }
    return j;
}

json to_json(const OracleResult& r) {
    return {{"N", r.intervals}, {"levels", r.levels}, {"J", r.objective}, {"converged", r.converged}};
}

json to_json(const ReboundReport& r, bool include_samples) {
    json j = {{"warning", r.warning},
              {"warning_t", r.warning_t ? json(*r.warning_t) : json(nullptr)}};
    if (!r.d.empty()) {
        double d_max = r.d.front();
        for (double v : r.d) d_max = std::max(d_max, v);
        j["d_max"] = d_max;
    }
    if (include_samples) {
        j["t"] = r.t;
        j["d"] = r.d;
    }
    return j;
}

json to_json(const LyapunovEstimate& e) {
    return {{"exponent", e.exponent},
            {"horizon", e.horizon},
            {"renorm_interval", e.renorm_interval},
            {"renormalizations", e.renormalizations}};
}

json summary_json(const HessianReport& r) {
    json j = {{"negative_semidefinite", r.negative_semidefinite},
              {"nodes_evaluated", r.nodes.size()},
              {"nodes_skipped", r.skipped},
              {"first_violation_t", r.first_violation_t ? json(*r.first_violation_t)
                                                        : json(nullptr)}};
    if (!r.nodes.empty()) {
        const auto& n = r.nodes.front();
        j["first_node"] = {{"t", n.t},
                           {"h11", n.h11},
                           {"h14", n.h14},
                           {"h44", n.h44},
                           {"leading_minors", n.leading_minors},
                           {"eigenvalues", n.eigenvalues}};
    }
    return j;
}

Diagnostics run_diagnostics(const Trajectory& trajectory, const Scenario& s) {
    const auto model = make_contagion(s.contagion);
    Diagnostics out;
    out.hessian = hessian_check(trajectory, s, *model);
    out.rebound = rebound_monitor(trajectory, s.numerics.rebound_epsilon);
    if (trajectory.nodes.empty()) {
        out.lyapunov_error = "empty trajectory";
        return out;
    }
    const auto& first = trajectory.nodes.front();
    try {
        out.lyapunov = lyapunov_largest(s, *model, {first.lambda1, first.q, first.h, first.u},
                                        s.horizon_days, 1.0);
    } catch (const OrbitEscape& e) {
        out.lyapunov_error = e.what();
    } catch (const std::invalid_argument& e) {
        out.lyapunov_error = e.what();
    }
    return out;
}

json to_json(const Diagnostics& d) {
    json j = {{"hessian", summary_json(d.hessian)}, {"rebound", to_json(d.rebound)}};
    if (d.lyapunov) {
        j["lyapunov"] = to_json(*d.lyapunov);
    } else {
        j["lyapunov"] = nullptr;
        j["lyapunov_error"] = d.lyapunov_error;
    }
    return j;
}

}  // namespace pandexit
