#pragma once

#include "pandexit/adjoint.hpp"
#include "pandexit/contagion.hpp"
#include "pandexit/scenario.hpp"

namespace pandexit {

struct ControlSolveConfig {
    double root_tol = 1e-12;
    double a_max = 1.0;
    double growth = 2.0;
};

struct ControlValue {
    double a = 0.0;
    bool at_boundary = false;  // true when clamped to a_max
};

/// Solves dm/da(q, a) · a^{1-α} = target for a in (0, a_max].
///
/// The left side is strictly increasing in a, so the root is bracketed by
/// geometric growth/shrink from a = min(1, a_max), narrowed by log-space
/// bisection and finished with Illinois false position until the relative
/// mismatch is below root_tol. When even a_max cannot
/// reach the target the cap is returned with at_boundary set.
ControlValue solve_first_order_condition(double target, double q, double alpha,
                                         const ContagionModel& model,
                                         const ControlSolveConfig& config);

/// Maximizer of the Hamiltonian over a ∈ [0, a_max] at one instant:
/// a = G(αA e^{-rt}/λ1, q). Nonpositive λ1 gives the cap. Throws
/// std::invalid_argument on NaN inputs or a non-finite target.
ControlValue optimal_control(double t, double q, double lambda1, const Scenario& s,
                             const ContagionModel& model);

/// αA e^{-rt} - λ1 dm/da(q, a) a^{1-α}; zero at an interior optimum.
double first_order_residual(double t, double q, double lambda1, double a, const Scenario& s,
                            const ContagionModel& model);

/// H = [A a^α - β_q q - β_h h - β_u u] e^{-rt}
///     - λ1 [m - v_qh q] - λ2 [v_qh q - v_hu h] - λ3 [v_hu h - v_uinf u].
///
/// Both conventions use this expression: textbook costates are the same
/// cost-type multipliers, only their dynamics differ.
double hamiltonian_value(double t, const StateVec& state, const CostateVec& costate, double a,
                         const Scenario& s, const ContagionModel& model,
                         AdjointConvention convention);

}  // namespace pandexit
