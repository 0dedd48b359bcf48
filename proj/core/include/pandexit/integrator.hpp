#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pandexit {

template <std::size_t N>
using Vec = std::array<double, N>;

/// Uniform grid on [0, horizon] that hits the horizon exactly.
class TimeGrid {
  public:
    TimeGrid(double horizon, double requested_step) : horizon_(horizon) {
        if (!(horizon > 0.0) || !(requested_step > 0.0)) {
            throw std::invalid_argument("time grid needs positive horizon and step");
        }
        const double ratio = horizon / requested_step;
        auto n = static_cast<std::size_t>(std::llround(ratio));
        if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
            n = static_cast<std::size_t>(std::ceil(ratio));
        }
        intervals_ = n < 1 ? 1 : n;
        step_ = horizon / static_cast<double>(intervals_);
    }

    std::size_t intervals() const { return intervals_; }
    std::size_t size() const { return intervals_ + 1; }
    double step() const { return step_; }
    double horizon() const { return horizon_; }
    double at(std::size_t i) const {
        return i == intervals_ ? horizon_ : static_cast<double>(i) * step_;
    }

  private:
    double horizon_;
    std::size_t intervals_ = 1;
    double step_ = 0.0;
};

enum class Direction { forward, backward };

/// Raised when the integrated solution stops being finite.
class IntegrationError : public std::runtime_error {
  public:
    IntegrationError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
    double t() const { return t_; }

  private:
    double t_;
};

/// One classical RK4 step of size h (h may be negative).
template <std::size_t N, class Rhs>
Vec<N> rk4_step(Rhs& rhs, double t, const Vec<N>& y, double h) {
    auto axpy = [](const Vec<N>& base, double s, const Vec<N>& k) {
        Vec<N> out;
        for (std::size_t j = 0; j < N; ++j) out[j] = base[j] + s * k[j];
        return out;
    };
    const Vec<N> k1 = rhs(t, y);
    const Vec<N> k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const Vec<N> k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const Vec<N> k4 = rhs(t + h, axpy(y, h, k3));
    Vec<N> next;
    for (std::size_t j = 0; j < N; ++j) {
        next[j] = y[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    return next;
}

/// Fixed-step RK4 over every node of `grid`.
///
/// `boundary` is the value at t = 0 for forward integration and at the
/// horizon for backward integration. The result is indexed by grid node in
/// both cases. `rhs(t, y)` must return dy/dt.
template <std::size_t N, class Rhs>
std::vector<Vec<N>> integrate(Rhs&& rhs, const Vec<N>& boundary, const TimeGrid& grid,
                              Direction direction) {
    const std::size_t n = grid.intervals();
    std::vector<Vec<N>> path(grid.size());
    auto check = [](const Vec<N>& y, double t) {
        for (double v : y) {
            if (!std::isfinite(v)) {
                throw IntegrationError("non-finite value during integration at t = " +
                                           std::to_string(t),
                                       t);
            }
        }
    };
    if (direction == Direction::forward) {
        path[0] = boundary;
        for (std::size_t i = 0; i < n; ++i) {
            path[i + 1] = rk4_step<N>(rhs, grid.at(i), path[i], grid.at(i + 1) - grid.at(i));
            check(path[i + 1], grid.at(i + 1));
        }
    } else {
        path[n] = boundary;
        for (std::size_t i = n; i > 0; --i) {
            path[i - 1] = rk4_step<N>(rhs, grid.at(i), path[i], grid.at(i - 1) - grid.at(i));
            check(path[i - 1], grid.at(i - 1));
        }
    }
    return path;
}

/// Piecewise-linear reading of node samples on a uniform grid.
class GridSignal {
  public:
    GridSignal(const TimeGrid& grid, std::span<const double> values)
        : step_(grid.step()), last_(grid.intervals()), values_(values) {}

    double operator()(double t) const {
        double x = t / step_;
        if (x <= 0.0) return values_[0];
        auto i = static_cast<std::size_t>(x);
        if (i >= last_) return values_[last_];
        double w = x - static_cast<double>(i);
        if (w < 1e-12) return values_[i];
        return (1.0 - w) * values_[i] + w * values_[i + 1];
    }

  private:
    double step_;
    std::size_t last_;
    std::span<const double> values_;
};

/// Composite Simpson rule over uniformly spaced samples; when the number of
/// intervals is odd the final interval uses the trapezoid rule.
inline double simpson(std::span<const double> values, double step) {
    const std::size_t n = values.size() < 2 ? 0 : values.size() - 1;
    if (n == 0) return 0.0;
    const std::size_t even = n - (n % 2);
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 <= even; i += 2) {
        sum += values[i] + 4.0 * values[i + 1] + values[i + 2];
    }
    double total = sum * step / 3.0;
    if (even != n) total += 0.5 * step * (values[n - 1] + values[n]);
    return total;
}

}  // namespace pandexit
