#include "pandexit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pandexit {

std::size_t level_index(double t, double horizon, std::size_t intervals) {
    const double x = t * static_cast<double>(intervals) / horizon + 1e-9;
    if (x <= 0.0) return 0;
    return std::min(intervals - 1, static_cast<std::size_t>(x));
}

namespace {

double piece_edge(std::size_t k, double T, std::size_t N) {
    return k == N ? T : T * static_cast<double>(k) / static_cast<double>(N);
}

}  // namespace

Trajectory simulate_levels(std::span<const double> levels, const Scenario& s) {
    if (levels.empty()) throw std::invalid_argument("simulate_levels: no control levels");
    const auto model = make_contagion(s.contagion);
    const TimeGrid grid(s.horizon_days, s.numerics.step_days);
    const double T = s.horizon_days;
    const std::size_t N = levels.size();

    Trajectory traj;
    traj.step_days = grid.step();
    traj.scenario_digest = scenario_digest(s);
    traj.nodes.resize(grid.size());

    StateVec x{s.q0, s.h0, s.u0};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto& node = traj.nodes[i];
        node.t = grid.at(i);
        node.q = x[0];
        node.h = x[1];
        node.u = x[2];
        node.a = levels[level_index(node.t, T, N)];
        if (i + 1 == grid.size()) break;
        // Steps that straddle a level switch are split there so the state
        // stays fourth-order accurate for the discontinuous control.
        double t0 = grid.at(i);
        const double t1 = grid.at(i + 1);
        while (t0 < t1) {
            const std::size_t k = level_index(t0, T, N);
            double stop = std::min(t1, piece_edge(k + 1, T, N));
            if (t1 - stop < 1e-12 * T) stop = t1;
            const double a = levels[k];
            auto rhs = [&](double t, const StateVec& y) { return state_rhs(t, y, a, s, *model); };
            x = rk4_step<3>(rhs, t0, x, stop - t0);
            t0 = stop;
        }
    }
    annotate(traj, s, *model);
    return traj;
}

double simulate_and_score(std::span<const double> levels, const Scenario& s) {
    if (levels.empty()) throw std::invalid_argument("simulate_and_score: no control levels");
    const auto model = make_contagion(s.contagion);
    const double T = s.horizon_days;
    const std::size_t N = levels.size();
    const double h = s.numerics.step_days;

    // Simpson on each piece separately, with an even number of steps no
    // longer than the solver step. Integrating across a jump in the control
    // would bias the score by O(step * jump) at every switch.
    StateVec x{s.q0, s.h0, s.u0};
    std::vector<double> values;
    double total = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
        const double t0 = piece_edge(k, T, N), t1 = piece_edge(k + 1, T, N);
        const double len = t1 - t0;
        auto steps = static_cast<std::size_t>(std::ceil(len / h * (1.0 - 1e-9)));
        steps = std::max<std::size_t>(2, steps + steps % 2);
        const double dt = len / static_cast<double>(steps);
        const double a = levels[k];
        auto rhs = [&](double t, const StateVec& y) { return state_rhs(t, y, a, s, *model); };
        values.assign(steps + 1, 0.0);
        for (std::size_t j = 0; j <= steps; ++j) {
            const double t = j == steps ? t1 : t0 + static_cast<double>(j) * dt;
            values[j] = payoff_rate(t, x, a, s);
            if (j < steps) x = rk4_step<3>(rhs, t, x, dt);
        }
        total += simpson(values, dt);
    }
    return total;
}

namespace {

struct Ascent {
    std::vector<double> levels;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

Ascent ascend(const Scenario& s, std::vector<double> x) {
    const double cap = s.a_max;
    const double delta = 1e-4 * cap;
    const std::size_t N = x.size();
    auto score = [&](const std::vector<double>& v) {
        const double J = simulate_and_score(v, s);
        return std::isfinite(J) ? J : -std::numeric_limits<double>::infinity();
    };

    Ascent out;
    double J = score(x);
    std::vector<double> grad(N), trial(N), probe(N);
    for (int iter = 0; iter < s.numerics.max_iters; ++iter) {
        out.iterations = iter + 1;
        // Finite-difference gradient, one-sided where a bound is in the way.
        for (std::size_t k = 0; k < N; ++k) {
            const double lo = std::max(0.0, x[k] - delta);
            const double hi = std::min(cap, x[k] + delta);
            probe = x;
            probe[k] = hi;
            const double J_hi = hi == x[k] ? J : score(probe);
            probe[k] = lo;
            const double J_lo = lo == x[k] ? J : score(probe);
            grad[k] = (J_hi - J_lo) / (hi - lo);
        }
        double pg_norm = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            const bool blocked = (x[k] <= 0.0 && grad[k] < 0.0) || (x[k] >= cap && grad[k] > 0.0);
            if (!blocked) pg_norm = std::max(pg_norm, std::abs(grad[k]));
        }
        if (pg_norm * cap <= 1e-6 * std::max(1.0, std::abs(J))) {
            out.converged = true;
            break;
        }

        // Backtracking from the step that moves the steepest free level by a_max.
        double step = cap / pg_norm;
        bool accepted = false;
        for (int k = 0; k < 80; ++k, step *= 0.5) {
            double predicted = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                trial[j] = std::clamp(x[j] + step * grad[j], 0.0, cap);
                predicted += grad[j] * (trial[j] - x[j]);
            }
            if (predicted <= 0.0) break;
            const double J_trial = score(trial);
            if (J_trial > J && J_trial >= J + 1e-4 * predicted) {
                x = trial;
                J = J_trial;
                out.history.push_back(J);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    out.levels = std::move(x);
    out.objective = J;
    return out;
}

}  // namespace

OracleResult optimize(const Scenario& s, std::size_t intervals) {
    if (intervals < 1) throw std::invalid_argument("oracle needs at least one interval");
    const double starts[] = {0.5 * s.a_max, 0.1 * s.a_max, 0.9 * s.a_max};
    OracleResult best;
    bool have = false;
    for (std::size_t r = 0; r < 3; ++r) {
        Ascent run = ascend(s, std::vector<double>(intervals, starts[r]));
        if (!have || run.objective > best.objective) {
            best.intervals = intervals;
            best.levels = std::move(run.levels);
            best.objective = run.objective;
            best.iterations = run.iterations;
            best.converged = run.converged;
            best.improvement_history = std::move(run.history);
            best.restart = r;
            have = true;
        }
    }
    return best;
}

}  // namespace pandexit
