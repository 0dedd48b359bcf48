#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "pandexit/contagion.hpp"
#include "pandexit/integrator.hpp"
#include "pandexit/scenario.hpp"

namespace pandexit {

/// (q, h, u), persons.
using StateVec = Vec<3>;
/// (λ1, λ2, λ3), currency/person.
using CostateVec = Vec<3>;

struct CostatePoint {
    double t = 0.0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
};

/// Costate right-hand side at one instant. The paper convention returns
///
///   dλ1/dt = (∂m/∂q - v_qh) λ1 + v_qh λ2 + β_q e^{-rt}
///   dλ2/dt = -v_hu λ2 + v_hu λ3 + β_h e^{-rt}
///   dλ3/dt = -v_uinf λ3 + β_u e^{-rt}
///
/// and the textbook convention returns the negation.
CostateVec costate_rhs(double t, const StateVec& state, const CostateVec& costate, double a,
                       const Scenario& s, const ContagionModel& model,
                       AdjointConvention convention);

/// Thrown when the closed form would divide by a near-zero rate difference.
/// Callers should fall back to `numeric_lambda23`.
class SingularSeparation : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

struct TerminalZero {};
struct ExplicitAmplitudes {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Closed-form solution of the (λ2, λ3) subsystem
///
///   λ2(t) = c1 e^{ω1 t} + c2 e^{ω2 t} + B0 e^{-rt}
///   λ3(t) = c2 (v_hu - v_uinf)/v_hu e^{ω2 t} + D3 e^{-rt}
///
/// with ω1 = -v_hu, ω2 = -v_uinf (paper) or their negatives (textbook).
/// Eigenvectors are (1, 0) and (v_hu, v_hu - v_uinf) in both conventions.
class ClosedFormCostate {
  public:
    ClosedFormCostate(const Scenario& s, AdjointConvention convention, double c1, double c2);

    double lambda2(double t) const;
    double lambda3(double t) const;
    /// Analytic time derivatives of the closed form.
    double dlambda2(double t) const;
    double dlambda3(double t) const;

    AdjointConvention convention() const { return convention_; }
    std::array<double, 2> eigenvalues() const { return {omega1_, omega2_}; }
    std::array<Vec<2>, 2> eigenvectors() const {
        return {Vec<2>{1.0, 0.0}, Vec<2>{v_hu_, v_hu_ - v_uinf_}};
    }
    double c1() const { return c1_; }
    double c2() const { return c2_; }
    double b0() const { return b0_; }
    double d3() const { return d3_; }
    double discount_rate() const { return r_; }

  private:
    AdjointConvention convention_;
    double v_hu_, v_uinf_, r_;
    double omega1_, omega2_;
    double c1_, c2_;
    double b0_, d3_;
    double lambda3_ratio_;  // (v_hu - v_uinf) / v_hu
};

/// Particular-solution amplitude of λ2 in the paper convention, evaluated
/// term for term as
///   B0 = β_h/(v_hu - r) + β_u v_hu/(v_hu - v_uinf) (1/(v_uinf - r) - 1/(v_hu - r)).
double particular_b0(double beta_h, double beta_u, double v_hu, double v_uinf, double r);

/// Builds the closed form for the given boundary data. Throws
/// SingularSeparation when any required rate difference is within eps_sep.
ClosedFormCostate closed_form_lambda23(const Scenario& s, AdjointConvention convention,
                                       TerminalZero boundary);
ClosedFormCostate closed_form_lambda23(const Scenario& s, AdjointConvention convention,
                                       ExplicitAmplitudes boundary);

/// Backward RK4 integration of the (λ2, λ3) subsystem from terminal values.
/// Returns one sample per grid node.
std::vector<Vec<2>> numeric_lambda23(const Scenario& s, AdjointConvention convention,
                                     const Vec<2>& terminal, const TimeGrid& grid);

struct ForcingBound {
    double Q = 0.0;      // sum of absolute exponential amplitudes
    double theta = 0.0;  // slowest decay rate; |K(t)| <= Q e^{-θ t} for t >= 0
};

/// K(t) = v_qh λ2(t) + β_q e^{-rt}, the λ1 forcing of the reduced system.
class ForcingTerm {
  public:
    ForcingTerm(const Scenario& s, const ClosedFormCostate& costate);

    double operator()(double t) const;
    const ForcingBound& bound() const { return bound_; }

  private:
    double k1_, k2_, k3_;  // amplitudes on e^{ω1 t}, e^{ω2 t}, e^{-rt}
    double omega1_, omega2_, r_;
    ForcingBound bound_;
};

ForcingTerm K_of_t(const Scenario& s, const ClosedFormCostate& costate);

}  // namespace pandexit
