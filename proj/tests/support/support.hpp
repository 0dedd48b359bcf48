#pragma once

// Fixtures, hand-rolled generators and independent numerical oracles shared
// by the unit and acceptance tests. Nothing here calls into the integrator,
// root finder or eigen code of the library under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pandexit/scenario.hpp"

namespace pandexit::fixtures {

inline Scenario s0() {
    Scenario s;
    s.label = "S0 reference fixture";
    s.tau = 60;
    s.A = 1.0;
    s.alpha = 0.6;
    s.r = 0.0001;
    s.a_max = 1e6;
    s.beta_q = 0.2;
    s.beta_h = 5;
    s.beta_u = 20;
    s.v_qh = 0.05;
    s.v_hu = 0.2;
    s.v_uinf = 0.1;
    s.contagion = {"quadratic", 2e-6, 1e-6};
    s.horizon_days = 90;
    s.q0 = 1e5;
    s.h0 = 1e3;
    s.u0 = 100;
    return s;
}

/// Small, well-scaled scenario used where S0's stiffness is not the point.
inline Scenario small_scenario() {
    Scenario s;
    s.label = "small";
    s.A = 1.0;
    s.alpha = 0.5;
    s.r = 0.05;
    s.a_max = 16;
    s.beta_q = 0.5;
    s.beta_h = 1.0;
    s.beta_u = 2.0;
    s.v_qh = 0.1;
    s.v_hu = 0.2;
    s.v_uinf = 0.15;
    s.contagion = {"quadratic", 0.002, 0.001};
    s.horizon_days = 10;
    s.q0 = 10;
    s.h0 = 1;
    s.u0 = 0.5;
    s.numerics.step_days = 0.01;
    return s;
}

inline Scenario zero_cost(Scenario s) {
    s.beta_q = s.beta_h = s.beta_u = 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

class Gen {
  public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool coin() { return integer(0, 1) == 1; }
    std::mt19937_64& engine() { return rng_; }

  private:
    std::mt19937_64 rng_;
};

/// A random scenario; callers keep the draws that pass check_invariants
/// (rare paper-convention draws land inside eps_sep).
inline Scenario random_scenario(Gen& g) {
    Scenario s;
    s.label = "draw-" + std::to_string(g.integer(0, 1 << 20));
    s.tau = g.uniform(0, 90);
    s.A = g.log_uniform(0.1, 10);
    s.alpha = g.uniform(0.05, 0.95);
    s.r = g.coin() ? 0.0 : g.log_uniform(1e-5, 0.1);
    s.a_max = g.log_uniform(1, 1e6);
    s.beta_q = g.uniform(0, 10);
    s.beta_h = g.uniform(0, 10);
    s.beta_u = g.uniform(0, 50);
    s.v_qh = g.uniform(0.01, 1);
    s.v_hu = g.uniform(0.01, 1);
    s.v_uinf = g.uniform(0.01, 1);
    s.contagion = {"quadratic", g.coin() ? 0.0 : g.log_uniform(1e-8, 1e-2),
                   g.log_uniform(1e-8, 1e-2)};
    s.horizon_days = g.uniform(5, 120);
    s.q0 = g.uniform(0, 1e5);
    s.h0 = g.uniform(0, 1e4);
    s.u0 = g.uniform(0, 1e3);
    s.numerics.step_days = s.horizon_days / g.integer(10, 2000);
    s.numerics.adjoint_convention = g.coin() ? AdjointConvention::paper : AdjointConvention::textbook;
    s.numerics.shooting_tol = g.log_uniform(1e-12, 1e-4);
    s.numerics.root_tol = g.log_uniform(1e-14, 1e-6);
    s.numerics.fbsm_relaxation = g.uniform(0.05, 0.95);
    s.numerics.max_iters = g.integer(1, 1000);
    s.numerics.eps_sep = g.log_uniform(1e-9, 1e-4);
    s.numerics.rebound_epsilon = g.log_uniform(1e-6, 1);
    if (g.integer(0, 3) == 0) {
        s.boundary.c1 = g.uniform(-10, 10);
        s.boundary.c2 = g.uniform(-10, 10);
    }
    if (g.integer(0, 3) == 0) s.boundary.lambda1_0 = g.uniform(-5, 5);
    return s;
}

/// Costate-relevant parameters with every rate pair separated by > 1e-3.
struct CostateDraw {
    double beta_h, beta_u, v_hu, v_uinf, r, horizon;
};

inline CostateDraw random_costate_draw(Gen& g) {
    for (;;) {
        CostateDraw d{g.uniform(0.1, 20), g.uniform(0.1, 50), g.uniform(0.02, 0.5),
                      g.uniform(0.02, 0.5), g.uniform(0.0, 0.1), g.uniform(10, 60)};
        if (std::abs(d.v_hu - d.v_uinf) > 1e-3 && std::abs(d.v_hu - d.r) > 1e-3 &&
            std::abs(d.v_uinf - d.r) > 1e-3) {
            return d;
        }
    }
}

inline Scenario with_costate_draw(Scenario s, const CostateDraw& d) {
    s.beta_h = d.beta_h;
    s.beta_u = d.beta_u;
    s.v_hu = d.v_hu;
    s.v_uinf = d.v_uinf;
    s.r = d.r;
    s.horizon_days = d.horizon;
    return s;
}

// ---------------------------------------------------------------------------
// Independent oracles
// ---------------------------------------------------------------------------

/// Plain bisection on a sign change of f over [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-13) {
    double flo = f(lo);
    for (int i = 0; i < 400 && hi - lo > tol * std::max(1.0, std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

using State = std::vector<double>;
using Field = std::function<State(double, const State&)>;

/// Textbook fourth-order Runge-Kutta written out independently. h < 0
/// integrates backward. Returns the state after n steps.
inline State rk4(const Field& f, double t0, State y, double h, long n) {
    auto add = [](const State& a, double s, const State& b) {
        State out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
        return out;
    };
    double t = t0;
    for (long k = 0; k < n; ++k) {
        const State k1 = f(t, y);
        const State k2 = f(t + h / 2, add(y, h / 2, k1));
        const State k3 = f(t + h / 2, add(y, h / 2, k2));
        const State k4 = f(t + h, add(y, h, k3));
        for (std::size_t i = 0; i < y.size(); ++i) {
            y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
        t = t0 + static_cast<double>(k + 1) * h;
    }
    return y;
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix (row-major), ascending.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> m, std::size_t n) {
    auto at = [&](std::size_t i, std::size_t j) -> double& { return m[i * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (at(p, q) == 0.0) continue;
                const double theta = (at(q, q) - at(p, p)) / (2 * at(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

/// Linear cascade q' = -a q, h' = a q - b h, u' = b h - c u in closed form.
inline std::array<double, 3> cascade(double t, double q0, double h0, double u0, double a,
                                     double b, double c) {
    const double ea = std::exp(-a * t), eb = std::exp(-b * t), ec = std::exp(-c * t);
    const double q = q0 * ea;
    const double h = h0 * eb + q0 * a * (ea - eb) / (b - a);
    // u from variation of constants, term by term.
    const double u = u0 * ec + h0 * b * (eb - ec) / (c - b) +
                     q0 * a * b / (b - a) * ((ea - ec) / (c - a) - (eb - ec) / (c - b));
    return {q, h, u};
}

inline double rel_diff(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace pandexit::fixtures
