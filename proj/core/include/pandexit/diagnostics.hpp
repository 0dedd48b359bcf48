#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pandexit/contagion.hpp"
#include "pandexit/integrator.hpp"
#include "pandexit/scenario.hpp"
#include "pandexit/solver.hpp"

namespace pandexit {

// ---------------------------------------------------------------------------
// Hamiltonian Hessian
// ---------------------------------------------------------------------------

/// Absolute tolerance on the largest eigenvalue for the semidefinite flag.
inline constexpr double kSemidefiniteTolerance = 1e-12;

/// Hessian of H in (q, h, u, a). Only h11, h14 = h41 and h44 are nonzero:
///   h11 = -λ1 m_qq,  h14 = -λ1 m_qa,  h44 = α(α-1) A a^{α-2} e^{-rt} - λ1 m_aa.
struct HessianNode {
    double t = 0.0;
    double h11 = 0.0;
    double h14 = 0.0;
    double h41 = 0.0;
    double h44 = 0.0;
    std::array<double, 4> leading_minors{};  // Δ1..Δ4 of the full 4x4 matrix
    std::array<double, 2> eigenvalues{};     // of [[h11, h14], [h41, h44]], ascending
    bool negative_semidefinite = false;
};

struct HessianReport {
    std::vector<HessianNode> nodes;
    std::size_t skipped = 0;  // nodes with a = 0, where h44 is singular
    bool negative_semidefinite = true;
    std::optional<double> first_violation_t;
};

/// Eigenvalues of a symmetric 2x2 matrix, ascending. The small-magnitude
/// eigenvalue is recovered as det / large so its sign stays exact.
std::array<double, 2> symmetric_eigenvalues(double a, double b, double c);

/// Leading principal minors of a dense 4x4 matrix (row-major).
std::array<double, 4> leading_minors(const std::array<double, 16>& m);

HessianNode hessian_at(double t, double q, double a, double lambda1, const Scenario& s,
                       const ContagionModel& model);

/// Evaluates the Hessian at every node with a > 0. The overall flag is the
/// conjunction of the per-node eigenvalue tests.
HessianReport hessian_check(const Trajectory& trajectory, const Scenario& s,
                            const ContagionModel& model);

// ---------------------------------------------------------------------------
// Rebound monitor
// ---------------------------------------------------------------------------

struct ReboundReport {
    std::vector<double> t;
    std::vector<double> d;
    std::optional<double> warning_t;
    bool warning = false;
};

/// Flags the first sample where d rises above -epsilon after having been
/// below it.
ReboundReport rebound_monitor(std::span<const double> t, std::span<const double> d,
                              double epsilon);
ReboundReport rebound_monitor(const Trajectory& trajectory, double epsilon);

// ---------------------------------------------------------------------------
// Largest Lyapunov exponent
// ---------------------------------------------------------------------------

struct LyapunovEstimate {
    double exponent = 0.0;  // 1/day
    double horizon = 0.0;   // trajectory length actually used
    double renorm_interval = 0.0;
    std::size_t renormalizations = 0;
};

/// The orbit left the region where the estimate is meaningful.
class OrbitEscape : public std::runtime_error {
  public:
    OrbitEscape(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double t() const { return t_; }

  private:
    double t_;
};

/// Two-trajectory estimate: a companion orbit starts delta0 away along the
/// diagonal, both are advanced with RK4, and the separation is rescaled after
/// every renormalization interval. The exponent is the mean log growth per
/// unit time. The separation is delta0 * max(1, |x|) so it stays resolvable
/// in floating point when the orbit itself grows. `admissible(x)` may reject
/// states (escape).
template <std::size_t N, class Rhs>
LyapunovEstimate lyapunov_largest(Rhs&& rhs, const Vec<N>& initial, double horizon,
                                  double renorm_interval, double step, double delta0 = 1e-8,
                                  const std::function<bool(const Vec<N>&)>& admissible = {}) {
    if (!(horizon > 0.0) || !(renorm_interval > 0.0) || !(step > 0.0) || !(delta0 > 0.0)) {
        throw std::invalid_argument("lyapunov_largest: horizon, interval, step and delta0 must "
                                    "be positive");
    }
    const auto steps_per_interval =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(renorm_interval / step)));
    const double h = renorm_interval / static_cast<double>(steps_per_interval);
    const auto intervals = static_cast<std::size_t>(std::floor(horizon / renorm_interval + 1e-9));
    if (intervals == 0) throw std::invalid_argument("lyapunov_largest: horizon below interval");

    auto separation_for = [delta0](const Vec<N>& x) {
        double n2 = 0.0;
        for (double v : x) n2 += v * v;
        return delta0 * std::max(1.0, std::sqrt(n2));
    };
    Vec<N> base = initial;
    Vec<N> companion = initial;
    double sep = separation_for(initial);
    const double offset = sep / std::sqrt(static_cast<double>(N));
    for (auto& v : companion) v += offset;

    auto check = [&](const Vec<N>& x, double t) {
        for (double v : x) {
            if (!std::isfinite(v)) throw OrbitEscape("orbit became non-finite", t);
        }
        if (admissible && !admissible(x)) throw OrbitEscape("orbit left admissible region", t);
    };

    double log_sum = 0.0;
    double t = 0.0;
    for (std::size_t k = 0; k < intervals; ++k) {
        for (std::size_t j = 0; j < steps_per_interval; ++j) {
            base = rk4_step<N>(rhs, t, base, h);
            companion = rk4_step<N>(rhs, t, companion, h);
            t += h;
        }
        check(base, t);
        check(companion, t);
        double dist2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) dist2 += (companion[i] - base[i]) * (companion[i] - base[i]);
        const double dist = std::sqrt(dist2);
        if (!(dist > 0.0) || !std::isfinite(dist)) {
            throw OrbitEscape("perturbation collapsed or overflowed", t);
        }
        log_sum += std::log(dist / sep);
        sep = separation_for(base);
        for (std::size_t i = 0; i < N; ++i) {
            companion[i] = base[i] + (companion[i] - base[i]) * (sep / dist);
        }
    }
    const double used = static_cast<double>(intervals) * renorm_interval;
    return {log_sum / used, used, renorm_interval, intervals};
}

/// Right-hand side of the autonomous reduced system in (λ1, q, h, u): the λ1
/// equation without K(t) forcing and the control taken undiscounted,
/// a = G(αA/λ1, q). Textbook convention negates the λ1 rate.
std::function<Vec<4>(double, const Vec<4>&)> autonomous_rhs(const Scenario& s,
                                                             const ContagionModel& model,
                                                             AdjointConvention convention);

/// Largest exponent of the autonomous system from a point with λ1 > 0.
/// Throws OrbitEscape when λ1 reaches zero or the orbit blows up.
LyapunovEstimate lyapunov_largest(const Scenario& s, const ContagionModel& model,
                                  const Vec<4>& initial, double horizon, double renorm_interval);

}  // namespace pandexit
