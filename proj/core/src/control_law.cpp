#include "pandexit/control_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pandexit {

namespace {

double marginal(double q, double a, double alpha, const ContagionModel& model) {
    return model.dm_da(q, a) * std::pow(a, 1.0 - alpha);
}

}  // namespace

ControlValue solve_first_order_condition(double target, double q, double alpha,
                                         const ContagionModel& model,
                                         const ControlSolveConfig& config) {
    if (std::isnan(target) || std::isnan(q)) {
        throw std::invalid_argument("first-order condition: NaN input");
    }
    if (!std::isfinite(target)) {
        throw std::invalid_argument("first-order condition: non-finite target");
    }
    const double cap = config.a_max;
    if (marginal(q, cap, alpha, model) <= target) return {cap, true};
    if (target <= 0.0) return {0.0, false};

    auto mismatch = [&](double a) { return marginal(q, a, alpha, model) - target; };

    // Bracket [lo, hi] with mismatch(lo) < 0 <= mismatch(hi). The growth
    // factor squares after every miss so far-away roots take O(log log) steps.
    double lo = 0.0;
    double hi = std::min(1.0, cap);
    double factor = config.growth;
    if (mismatch(hi) < 0.0) {
        lo = hi;
        while (true) {
            hi = std::min(hi * factor, cap);
            if (hi >= cap || mismatch(hi) >= 0.0) break;
            lo = hi;
            factor = std::min(factor * factor, 1e16);
        }
    } else {
        while (true) {
            const double next = hi / factor;
            if (next <= std::numeric_limits<double>::min()) {
                lo = 0.0;
                break;
            }
            if (mismatch(next) < 0.0) {
                lo = next;
                break;
            }
            hi = next;
            factor = std::min(factor * factor, 1e16);
        }
    }

    const double tol = 0.5 * config.root_tol * target;
    double f_lo = lo > 0.0 ? mismatch(lo) : -target;
    double f_hi = mismatch(hi);
    int side = 0;
    for (int iter = 0; iter < 2000; ++iter) {
        double mid;
        if (lo > 0.0 && hi > 4.0 * lo) {
            mid = std::sqrt(lo * hi);  // bisection in log space
        } else if (hi - lo > 0.25 * hi) {
            mid = 0.5 * (lo + hi);
        } else {
            // Illinois false position once the bracket is tight.
            mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        }
        if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f = mismatch(mid);
        if (std::abs(f) <= tol) return {mid, false};
        if (f < 0.0) {
            lo = mid;
            f_lo = f;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            hi = mid;
            f_hi = f;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
    }
    // Bracket collapsed to adjacent doubles; keep the closer end.
    const double a = lo > 0.0 && std::abs(mismatch(lo)) < std::abs(mismatch(hi)) ? lo : hi;
    return {a, false};
}

ControlValue optimal_control(double t, double q, double lambda1, const Scenario& s,
                             const ContagionModel& model) {
    if (std::isnan(t) || std::isnan(q) || std::isnan(lambda1)) {
        throw std::invalid_argument("optimal_control: NaN input");
    }
    if (lambda1 <= 0.0) return {s.a_max, true};
    const double target = s.alpha * s.A * std::exp(-s.r * t) / lambda1;
    return solve_first_order_condition(target, q, s.alpha, model,
                                       {s.numerics.root_tol, s.a_max, 2.0});
}

double first_order_residual(double t, double q, double lambda1, double a, const Scenario& s,
                            const ContagionModel& model) {
    return s.alpha * s.A * std::exp(-s.r * t) -
           lambda1 * model.dm_da(q, a) * std::pow(a, 1.0 - s.alpha);
}

double hamiltonian_value(double t, const StateVec& x, const CostateVec& l, double a,
                         const Scenario& s, const ContagionModel& model, AdjointConvention) {
    const double q = x[0], h = x[1], u = x[2];
    const double payoff =
        (s.A * std::pow(a, s.alpha) - s.beta_q * q - s.beta_h * h - s.beta_u * u) *
        std::exp(-s.r * t);
    return payoff - l[0] * (model.rate_unchecked(q, a) - s.v_qh * q) -
           l[1] * (s.v_qh * q - s.v_hu * h) - l[2] * (s.v_hu * h - s.v_uinf * u);
}

}  // namespace pandexit
