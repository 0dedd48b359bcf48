#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "pandexit/adjoint.hpp"
#include "pandexit/contagion.hpp"
#include "pandexit/integrator.hpp"
#include "pandexit/scenario.hpp"

namespace pandexit {

struct TrajectoryNode {
    double t = 0.0;
    double q = 0.0;
    double h = 0.0;
    double u = 0.0;
    double a = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    double d = 0.0;          // dq/dt along the path, persons/day
    double integrand = 0.0;  // discounted payoff rate, currency/day
};

struct Trajectory {
    std::vector<TrajectoryNode> nodes;
    double step_days = 0.0;
    std::string scenario_digest;
};

/// Allowed dip below zero before a state is reported as negative.
inline constexpr double kStateNegativityTolerance = 1e-9;

struct SolveReport {
    AdjointConvention convention = AdjointConvention::textbook;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    /// λ1(T), λ2(T), λ3(T); zero targets under transversality.
    Vec<3> terminal_costate_residuals{0.0, 0.0, 0.0};
    bool lambda_positivity_violated = false;
    bool hessian_negative_semidefinite = false;
    std::vector<std::string> warnings;

    /// Forward-backward sweep: fixed-point residual per iteration.
    std::vector<double> change_history;
    double final_change = 0.0;
    double final_relaxation = 0.0;

    /// Shooting: (λ1(0) candidate, λ1(T)) pairs from the scan and bisection.
    std::vector<std::pair<double, double>> residual_curve;
    double lambda1_initial = 0.0;
};

struct SolveResult {
    Trajectory trajectory;
    SolveReport report;
};

/// (dq/dt, dh/dt, du/dt) = (m(q,a) - v_qh q, v_qh q - v_hu h, v_hu h - v_uinf u).
StateVec state_rhs(double t, const StateVec& x, double a, const Scenario& s,
                   const ContagionModel& model);

/// [A a^α - β_q q - β_h h - β_u u] e^{-rt}.
double payoff_rate(double t, const StateVec& x, double a, const Scenario& s);

/// Composite Simpson integral of the node integrands.
double objective(const Trajectory& trajectory, const Scenario& s);

/// Fills d and integrand for every node from its state and control.
void annotate(Trajectory& trajectory, const Scenario& s, const ContagionModel& model);

/// Paper convention: forward system in (λ1, q, h, u) driven by the closed
/// form K(t). λ1(0) comes from the scenario boundary block when given,
/// otherwise from shooting on λ1(T) = 0.
SolveResult solve_paper_mode(const Scenario& s);

/// Textbook convention: forward-backward sweep with relaxed control updates
/// and terminal-zero costates.
SolveResult solve_textbook_mode(const Scenario& s);

/// Dispatches on s.numerics.adjoint_convention.
SolveResult solve(const Scenario& s);

}  // namespace pandexit
