#include "pandexit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "pandexit/control_law.hpp"
#include "pandexit/diagnostics.hpp"

namespace pandexit {

StateVec state_rhs(double, const StateVec& x, double a, const Scenario& s,
                   const ContagionModel& model) {
    return {model.rate_unchecked(x[0], a) - s.v_qh * x[0], s.v_qh * x[0] - s.v_hu * x[1],
            s.v_hu * x[1] - s.v_uinf * x[2]};
}

double payoff_rate(double t, const StateVec& x, double a, const Scenario& s) {
    return (s.A * std::pow(a, s.alpha) - s.beta_q * x[0] - s.beta_h * x[1] - s.beta_u * x[2]) *
           std::exp(-s.r * t);
}

double objective(const Trajectory& trajectory, const Scenario& s) {
    std::vector<double> values;
    values.reserve(trajectory.nodes.size());
    for (const auto& n : trajectory.nodes) values.push_back(payoff_rate(n.t, {n.q, n.h, n.u}, n.a, s));
    return simpson(values, trajectory.step_days);
}

void annotate(Trajectory& trajectory, const Scenario& s, const ContagionModel& model) {
    for (auto& n : trajectory.nodes) {
        const StateVec x{n.q, n.h, n.u};
        n.d = state_rhs(n.t, x, n.a, s, model)[0];
        n.integrand = payoff_rate(n.t, x, n.a, s);
    }
}

namespace {

/// Shared post-processing: objective, sign checks and the Hessian flag.
void finalize(SolveResult& result, const Scenario& s, const ContagionModel& model) {
    auto& traj = result.trajectory;
    auto& report = result.report;
    traj.scenario_digest = scenario_digest(s);
    annotate(traj, s, model);
    report.objective = objective(traj, s);

    double min_state = std::numeric_limits<double>::infinity();
    double lambda_scale = 0.0;
    for (const auto& n : traj.nodes) {
        min_state = std::min({min_state, n.q, n.h, n.u});
        lambda_scale = std::max({lambda_scale, std::abs(n.lambda1), std::abs(n.lambda2),
                                 std::abs(n.lambda3)});
    }
    if (min_state < -kStateNegativityTolerance) {
        report.warnings.push_back("state went negative (min " + std::to_string(min_state) + ")");
    }
    const double horizon = traj.nodes.empty() ? 0.0 : traj.nodes.back().t;
    const double lambda_tol = 1e-9 * lambda_scale;
    for (const auto& n : traj.nodes) {
        if (n.t >= horizon - 0.5 * traj.step_days) break;
        if (n.lambda1 < -lambda_tol || n.lambda2 < -lambda_tol || n.lambda3 < -lambda_tol) {
            report.lambda_positivity_violated = true;
            break;
        }
    }
    if (report.lambda_positivity_violated) {
        report.warnings.push_back("lambda_positivity_violated");
    }
    if (!traj.nodes.empty()) {
        const auto& last = traj.nodes.back();
        report.terminal_costate_residuals = {last.lambda1, last.lambda2, last.lambda3};
    }
    report.hessian_negative_semidefinite = hessian_check(traj, s, model).negative_semidefinite;
}

using PaperPath = std::vector<Vec<4>>;  // (λ1, q, h, u) per node

}  // namespace

SolveResult solve_paper_mode(const Scenario& s) {
    const auto model = make_contagion(s.contagion);
    const TimeGrid grid(s.horizon_days, s.numerics.step_days);
    SolveResult result;
    auto& report = result.report;
    report.convention = AdjointConvention::paper;

    std::optional<ClosedFormCostate> closed;
    std::vector<Vec<2>> numeric;
    try {
        if (s.boundary.explicit_amplitudes()) {
            closed = closed_form_lambda23(s, AdjointConvention::paper,
                                          ExplicitAmplitudes{*s.boundary.c1, *s.boundary.c2});
        } else {
            closed = closed_form_lambda23(s, AdjointConvention::paper, TerminalZero{});
        }
    } catch (const SingularSeparation& e) {
        report.warnings.push_back(std::string("closed-form costates unavailable, using numeric "
                                              "terminal-zero path: ") +
                                  e.what());
        numeric = numeric_lambda23(s, AdjointConvention::paper, {0.0, 0.0}, grid);
    }
    std::vector<double> lambda2_samples, lambda3_samples;
    for (const auto& v : numeric) {
        lambda2_samples.push_back(v[0]);
        lambda3_samples.push_back(v[1]);
    }
    const GridSignal lambda2_signal(grid, lambda2_samples);
    const GridSignal lambda3_signal(grid, lambda3_samples);
    auto lambda2_at = [&](double t) { return closed ? closed->lambda2(t) : lambda2_signal(t); };
    auto lambda3_at = [&](double t) { return closed ? closed->lambda3(t) : lambda3_signal(t); };

    auto rhs = [&](double t, const Vec<4>& y) {
        const double a = optimal_control(t, y[1], y[0], s, *model).a;
        const StateVec x{y[1], y[2], y[3]};
        const StateVec dx = state_rhs(t, x, a, s, *model);
        const double forcing = s.v_qh * lambda2_at(t) + s.beta_q * std::exp(-s.r * t);
        return Vec<4>{(model->dm_dq(y[1], a) - s.v_qh) * y[0] + forcing, dx[0], dx[1], dx[2]};
    };
    auto run = [&](double lambda1_0) {
        return integrate<4>(rhs, Vec<4>{lambda1_0, s.q0, s.h0, s.u0}, grid, Direction::forward);
    };
    auto residual = [&](double lambda1_0) {
        ++report.iterations;
        double value = std::numeric_limits<double>::quiet_NaN();
        try {
            value = run(lambda1_0).back()[0];
        } catch (const IntegrationError&) {
        } catch (const std::invalid_argument&) {
        }
        report.residual_curve.emplace_back(lambda1_0, value);
        return value;
    };

    double lambda1_0 = 0.0;
    if (s.boundary.lambda1_0) {
        lambda1_0 = *s.boundary.lambda1_0;
        report.converged = true;
    } else {
        const double tol = s.numerics.shooting_tol;
        // λ1(T) grows with λ1(0), so the sign at zero says which half-line
        // holds the root. Scan that side outward first, then the other.
        std::optional<std::pair<double, double>> bracket;
        double r_lo = 0.0;
        const double r0 = residual(0.0);
        if (std::isfinite(r0) && std::abs(r0) <= tol) {
            report.converged = true;
        } else {
            const double first_side = std::isfinite(r0) && r0 > 0.0 ? -1.0 : 1.0;
            for (double side : {first_side, -first_side}) {
                double prev_x = 0.0, prev_r = r0;
                for (int k = -8; k <= 12 && !bracket && !report.converged; ++k) {
                    const double x = side * std::pow(10.0, k);
                    const double r = residual(x);
                    if (!std::isfinite(r)) continue;
                    if (std::abs(r) <= tol) {
                        lambda1_0 = x;
                        report.converged = true;
                    } else if (std::isfinite(prev_r) && (prev_r < 0.0) != (r < 0.0)) {
                        // Order the bracket so that lo < hi.
                        if (x < prev_x) {
                            bracket = {x, prev_x};
                            r_lo = r;
                        } else {
                            bracket = {prev_x, x};
                            r_lo = prev_r;
                        }
                    }
                    prev_x = x;
                    prev_r = r;
                }
                if (bracket || report.converged) break;
            }
        }
        if (!report.converged && bracket) {
            auto [lo, hi] = *bracket;
            double best_x = lo, best_r = r_lo;
            for (int iter = 0; iter < 200; ++iter) {
                double mid = 0.5 * (lo + hi);
                if (lo > 0.0 && hi > 4.0 * lo) mid = std::sqrt(lo * hi);
                if (hi < 0.0 && lo < 4.0 * hi) mid = -std::sqrt(lo * hi);
                if (mid <= lo || mid >= hi) break;
                const double r = residual(mid);
                if (!std::isfinite(r)) break;
                if (std::abs(r) < std::abs(best_r)) {
                    best_x = mid;
                    best_r = r;
                }
                if (std::abs(r) <= tol) {
                    report.converged = true;
                    break;
                }
                if ((r < 0.0) == (r_lo < 0.0)) {
                    lo = mid;
                    r_lo = r;
                } else {
                    hi = mid;
                }
            }
            lambda1_0 = best_x;
            if (!report.converged) {
                report.warnings.push_back("shooting bracket collapsed before |lambda1(T)| met "
                                          "shooting_tol");
            }
        } else if (!report.converged) {
            report.warnings.push_back("shooting scan found no sign change of lambda1(T)");
            // Keep the candidate with the smallest finite residual for inspection.
            double best = std::numeric_limits<double>::infinity();
            for (const auto& [x, r] : report.residual_curve) {
                if (std::isfinite(r) && std::abs(r) < best) {
                    best = std::abs(r);
                    lambda1_0 = x;
                }
            }
        }
    }
    report.lambda1_initial = lambda1_0;

    PaperPath path;
    try {
        path = run(lambda1_0);
    } catch (const IntegrationError& e) {
        report.converged = false;
        report.warnings.push_back(e.what());
        return result;
    }
    auto& traj = result.trajectory;
    traj.step_days = grid.step();
    traj.nodes.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto& n = traj.nodes[i];
        n.t = grid.at(i);
        n.lambda1 = path[i][0];
        n.q = path[i][1];
        n.h = path[i][2];
        n.u = path[i][3];
        n.lambda2 = lambda2_at(n.t);
        n.lambda3 = lambda3_at(n.t);
        n.a = optimal_control(n.t, n.q, n.lambda1, s, *model).a;
    }
    finalize(result, s, *model);
    return result;
}

namespace {

struct SweepState {
    std::vector<double> q, h, u;
    std::vector<double> l1, l2, l3;
};

void forward_states(const Scenario& s, const ContagionModel& model, const TimeGrid& grid,
                    const std::vector<double>& control, SweepState& st) {
    const GridSignal a_at(grid, control);
    auto rhs = [&](double t, const StateVec& x) { return state_rhs(t, x, a_at(t), s, model); };
    const auto path = integrate<3>(rhs, StateVec{s.q0, s.h0, s.u0}, grid, Direction::forward);
    for (std::size_t i = 0; i < path.size(); ++i) {
        st.q[i] = path[i][0];
        st.h[i] = path[i][1];
        st.u[i] = path[i][2];
    }
}

void backward_costates(const Scenario& s, const ContagionModel& model, const TimeGrid& grid,
                       const std::vector<double>& control, SweepState& st) {
    const GridSignal a_at(grid, control);
    const GridSignal q_at(grid, st.q), h_at(grid, st.h), u_at(grid, st.u);
    auto rhs = [&](double t, const CostateVec& l) {
        return costate_rhs(t, {q_at(t), h_at(t), u_at(t)}, l, a_at(t), s, model,
                           AdjointConvention::textbook);
    };
    const auto path = integrate<3>(rhs, CostateVec{0.0, 0.0, 0.0}, grid, Direction::backward);
    for (std::size_t i = 0; i < path.size(); ++i) {
        st.l1[i] = path[i][0];
        st.l2[i] = path[i][1];
        st.l3[i] = path[i][2];
    }
}

bool alternating(const std::vector<double>& history, std::size_t length) {
    if (history.size() < length + 1) return false;
    const std::size_t start = history.size() - length - 1;
    double prev_diff = 0.0;
    for (std::size_t k = start + 1; k < history.size(); ++k) {
        const double diff = history[k] - history[k - 1];
        if (diff == 0.0) return false;
        if (k > start + 1 && (diff > 0.0) == (prev_diff > 0.0)) return false;
        prev_diff = diff;
    }
    return true;
}

}  // namespace

SolveResult solve_textbook_mode(const Scenario& s) {
    const auto model = make_contagion(s.contagion);
    const TimeGrid grid(s.horizon_days, s.numerics.step_days);
    const std::size_t n = grid.size();
    SolveResult result;
    auto& report = result.report;
    report.convention = AdjointConvention::textbook;

    SweepState st{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n),
                  std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    std::vector<double> control(n, 0.5 * s.a_max);
    std::vector<double> candidate(n);
    std::vector<char> capped(n);
    double relaxation = s.numerics.fbsm_relaxation;
    bool relax_boundary = false;
    std::size_t oscillation_mark = 0;

    try {
        for (int iter = 1; iter <= s.numerics.max_iters; ++iter) {
            report.iterations = iter;
            forward_states(s, *model, grid, control, st);
            backward_costates(s, *model, grid, control, st);

            double change = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto cv = optimal_control(grid.at(i), st.q[i], st.l1[i], s, *model);
                candidate[i] = cv.a;
                capped[i] = cv.at_boundary;
                const double scale = std::max(std::abs(cv.a), std::abs(control[i]));
                if (scale > 0.0) change = std::max(change, std::abs(cv.a - control[i]) / scale);
            }
            report.change_history.push_back(change);
            report.final_change = change;
            if (change <= s.numerics.shooting_tol) {
                report.converged = true;
                break;
            }

            if (report.change_history.size() >= oscillation_mark + 6 &&
                alternating(report.change_history, 5)) {
                relaxation *= 0.5;
                relax_boundary = true;
                oscillation_mark = report.change_history.size();
                report.warnings.push_back("oscillating sweep: relaxation halved to " +
                                          std::to_string(relaxation));
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (capped[i] && !relax_boundary) {
                    control[i] = candidate[i];
                } else {
                    control[i] = (1.0 - relaxation) * control[i] + relaxation * candidate[i];
                }
            }
        }
        report.final_relaxation = relaxation;
        if (report.converged) {
            // One more consistent pass with the accepted control.
            control = candidate;
            forward_states(s, *model, grid, control, st);
            backward_costates(s, *model, grid, control, st);
        } else {
            report.warnings.push_back("forward-backward sweep hit max_iters with change " +
                                      std::to_string(report.final_change));
        }
    } catch (const IntegrationError& e) {
        report.converged = false;
        report.warnings.push_back(e.what());
        return result;
    }

    auto& traj = result.trajectory;
    traj.step_days = grid.step();
    traj.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = traj.nodes[i];
        node.t = grid.at(i);
        node.q = st.q[i];
        node.h = st.h[i];
        node.u = st.u[i];
        node.lambda1 = st.l1[i];
        node.lambda2 = st.l2[i];
        node.lambda3 = st.l3[i];
        node.a = optimal_control(node.t, node.q, node.lambda1, s, *model).a;
    }
    report.lambda1_initial = st.l1.front();
    finalize(result, s, *model);
    return result;
}

SolveResult solve(const Scenario& s) {
    return s.numerics.adjoint_convention == AdjointConvention::paper ? solve_paper_mode(s)
                                                                     : solve_textbook_mode(s);
}

}  // namespace pandexit
