#include "pandexit/diagnostics.hpp"

#include <algorithm>
#include <utility>

#include "pandexit/control_law.hpp"

namespace pandexit {

std::array<double, 2> symmetric_eigenvalues(double a, double b, double c) {
    const double mean = 0.5 * (a + c);
    const double radius = std::hypot(0.5 * (a - c), b);
    const double det = a * c - b * b;
    if (mean == 0.0) return {-radius, radius};
    const double large = mean + std::copysign(radius, mean);
    if (large == 0.0) return {0.0, 0.0};
    const double small = det / large;
    return {std::min(large, small), std::max(large, small)};
}

std::array<double, 4> leading_minors(const std::array<double, 16>& m) {
    std::array<double, 4> minors{};
    for (std::size_t k = 1; k <= 4; ++k) {
        // Gaussian elimination with partial pivoting on the top-left k x k block.
        std::array<double, 16> w{};
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) w[i * 4 + j] = m[i * 4 + j];
        }
        double det = 1.0;
        for (std::size_t col = 0; col < k; ++col) {
            std::size_t pivot = col;
            for (std::size_t i = col + 1; i < k; ++i) {
                if (std::abs(w[i * 4 + col]) > std::abs(w[pivot * 4 + col])) pivot = i;
            }
            if (w[pivot * 4 + col] == 0.0) {
                det = 0.0;
                break;
            }
            if (pivot != col) {
                for (std::size_t j = 0; j < k; ++j) std::swap(w[col * 4 + j], w[pivot * 4 + j]);
                det = -det;
            }
            det *= w[col * 4 + col];
            for (std::size_t i = col + 1; i < k; ++i) {
                const double f = w[i * 4 + col] / w[col * 4 + col];
                for (std::size_t j = col; j < k; ++j) w[i * 4 + j] -= f * w[col * 4 + j];
            }
        }
        minors[k - 1] = det;
    }
    return minors;
}

HessianNode hessian_at(double t, double q, double a, double lambda1, const Scenario& s,
                       const ContagionModel& model) {
    const auto p = model.partials_unchecked(q, a);
    HessianNode node;
    node.t = t;
    node.h11 = -lambda1 * p.d2m_dq2;
    node.h14 = -lambda1 * p.d2m_dqda;
    node.h41 = node.h14;
    node.h44 = s.alpha * (s.alpha - 1.0) * s.A * std::pow(a, s.alpha - 2.0) * std::exp(-s.r * t) -
               lambda1 * p.d2m_da2;
    const std::array<double, 16> full{node.h11, 0, 0, node.h14, 0, 0, 0, 0,
                                      0,        0, 0, 0,         node.h41, 0, 0, node.h44};
    node.leading_minors = leading_minors(full);
    node.eigenvalues = symmetric_eigenvalues(node.h11, node.h14, node.h44);
    node.negative_semidefinite = node.eigenvalues[1] <= kSemidefiniteTolerance;
    return node;
}

HessianReport hessian_check(const Trajectory& trajectory, const Scenario& s,
                            const ContagionModel& model) {
    HessianReport report;
    report.nodes.reserve(trajectory.nodes.size());
    for (const auto& n : trajectory.nodes) {
        if (!(n.a > 0.0)) {
            ++report.skipped;
            continue;
        }
        auto node = hessian_at(n.t, std::max(n.q, 0.0), n.a, n.lambda1, s, model);
        if (!node.negative_semidefinite && report.negative_semidefinite) {
            report.negative_semidefinite = false;
            report.first_violation_t = n.t;
        }
        report.nodes.push_back(node);
    }
    return report;
}

ReboundReport rebound_monitor(std::span<const double> t, std::span<const double> d,
                              double epsilon) {
    if (t.size() != d.size()) throw std::invalid_argument("rebound_monitor: t/d size mismatch");
    ReboundReport report;
    report.t.assign(t.begin(), t.end());
    report.d.assign(d.begin(), d.end());
    bool was_below = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= -epsilon) {
            was_below = true;
        } else if (was_below) {
            report.warning = true;
            report.warning_t = t[i];
            break;
        }
    }
    return report;
}

ReboundReport rebound_monitor(const Trajectory& trajectory, double epsilon) {
    std::vector<double> t, d;
    t.reserve(trajectory.nodes.size());
    d.reserve(trajectory.nodes.size());
    for (const auto& n : trajectory.nodes) {
        t.push_back(n.t);
        d.push_back(n.d);
    }
    return rebound_monitor(t, d, epsilon);
}

std::function<Vec<4>(double, const Vec<4>&)> autonomous_rhs(const Scenario& s,
                                                             const ContagionModel& model,
                                                             AdjointConvention convention) {
    const double sign = convention == AdjointConvention::paper ? 1.0 : -1.0;
    return [&s, &model, sign](double t, const Vec<4>& y) {
        const double lambda1 = y[0];
        const double q = std::max(y[1], 0.0);
        double a = s.a_max;
        if (lambda1 > 0.0) {
            a = solve_first_order_condition(s.alpha * s.A / lambda1, q, s.alpha, model,
                                            {s.numerics.root_tol, s.a_max, 2.0})
                    .a;
        }
        const StateVec dx = state_rhs(t, {y[1], y[2], y[3]}, a, s, model);
        return Vec<4>{sign * (model.dm_dq(q, a) - s.v_qh) * lambda1, dx[0], dx[1], dx[2]};
    };
}

LyapunovEstimate lyapunov_largest(const Scenario& s, const ContagionModel& model,
                                  const Vec<4>& initial, double horizon, double renorm_interval) {
    if (!(initial[0] > 0.0)) throw OrbitEscape("lambda1 must be positive on the orbit", 0.0);
    auto rhs = autonomous_rhs(s, model, s.numerics.adjoint_convention);
    std::function<bool(const Vec<4>&)> admissible = [](const Vec<4>& y) { return y[0] > 0.0; };
    return lyapunov_largest<4>(rhs, initial, horizon, renorm_interval, s.numerics.step_days,
                               1e-8, admissible);
}

}  // namespace pandexit
