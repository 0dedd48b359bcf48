#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pandexit/scenario.hpp"
#include "pandexit/solver.hpp"

namespace pandexit {

/// Direct-transcription result: N piecewise-constant control levels on equal
/// subintervals of [0, T] and the objective they achieve.
struct OracleResult {
    std::size_t intervals = 0;
    std::vector<double> levels;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Objective after every accepted step of the winning restart.
    std::vector<double> improvement_history;
    std::size_t restart = 0;  // index of the winning start (a_max/2, 0.1 a_max, 0.9 a_max)
};

/// Index of the control level active at time t.
std::size_t level_index(double t, double horizon, std::size_t intervals);

/// Integrates the state dynamics on the solver grid with the piecewise-
/// constant control, splitting steps at level switches. Node controls are
/// right-continuous. Costate columns are left at zero.
Trajectory simulate_levels(std::span<const double> levels, const Scenario& s);

/// Objective of a piecewise-constant control: composite Simpson on each
/// piece, at most the solver step apart. For a single level on an even
/// solver grid this is exactly `objective` of `simulate_levels`.
double simulate_and_score(std::span<const double> levels, const Scenario& s);

/// Projected gradient ascent on the N levels with central finite-difference
/// gradients (step 1e-4 a_max, one-sided at the bounds) and backtracking.
/// Three deterministic starts; the best result is returned.
OracleResult optimize(const Scenario& s, std::size_t intervals);

}  // namespace pandexit
