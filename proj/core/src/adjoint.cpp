#include "pandexit/adjoint.hpp"

#include <algorithm>
#include <cmath>

namespace pandexit {

CostateVec costate_rhs(double t, const StateVec& state, const CostateVec& costate, double a,
                       const Scenario& s, const ContagionModel& model,
                       AdjointConvention convention) {
    const double discount = std::exp(-s.r * t);
    const double dm_dq = model.dm_dq(state[0], a);
    CostateVec rate{
        (dm_dq - s.v_qh) * costate[0] + s.v_qh * costate[1] + s.beta_q * discount,
        -s.v_hu * costate[1] + s.v_hu * costate[2] + s.beta_h * discount,
        -s.v_uinf * costate[2] + s.beta_u * discount,
    };
    if (convention == AdjointConvention::textbook) {
        for (double& v : rate) v = -v;
    }
    return rate;
}

double particular_b0(double beta_h, double beta_u, double v_hu, double v_uinf, double r) {
    return beta_h / (v_hu - r) +
           beta_u * v_hu / (v_hu - v_uinf) * (1.0 / (v_uinf - r) - 1.0 / (v_hu - r));
}

ClosedFormCostate::ClosedFormCostate(const Scenario& s, AdjointConvention convention, double c1,
                                     double c2)
    : convention_(convention),
      v_hu_(s.v_hu),
      v_uinf_(s.v_uinf),
      r_(s.r),
      c1_(c1),
      c2_(c2),
      lambda3_ratio_((s.v_hu - s.v_uinf) / s.v_hu) {
    if (convention == AdjointConvention::paper) {
        omega1_ = -s.v_hu;
        omega2_ = -s.v_uinf;
        b0_ = particular_b0(s.beta_h, s.beta_u, s.v_hu, s.v_uinf, s.r);
        d3_ = s.beta_u / (s.v_uinf - s.r);
    } else {
        // Same subsystem with every right-hand side negated.
        omega1_ = s.v_hu;
        omega2_ = s.v_uinf;
        d3_ = s.beta_u / (s.v_uinf + s.r);
        b0_ = (s.beta_h + s.v_hu * d3_) / (s.v_hu + s.r);
    }
}

double ClosedFormCostate::lambda2(double t) const {
    return c1_ * std::exp(omega1_ * t) + c2_ * std::exp(omega2_ * t) + b0_ * std::exp(-r_ * t);
}

double ClosedFormCostate::lambda3(double t) const {
    return c2_ * lambda3_ratio_ * std::exp(omega2_ * t) + d3_ * std::exp(-r_ * t);
}

double ClosedFormCostate::dlambda2(double t) const {
    return omega1_ * c1_ * std::exp(omega1_ * t) + omega2_ * c2_ * std::exp(omega2_ * t) -
           r_ * b0_ * std::exp(-r_ * t);
}

double ClosedFormCostate::dlambda3(double t) const {
    return omega2_ * c2_ * lambda3_ratio_ * std::exp(omega2_ * t) - r_ * d3_ * std::exp(-r_ * t);
}

namespace {

void require_separation(const Scenario& s, AdjointConvention convention) {
    auto errors = check_rate_separation(s, convention);
    if (!errors.empty()) throw SingularSeparation(errors.front().message);
}

}  // namespace

ClosedFormCostate closed_form_lambda23(const Scenario& s, AdjointConvention convention,
                                       TerminalZero) {
    require_separation(s, convention);
    // Particular part first, then solve the 2x2 triangular system for the
    // homogeneous amplitudes that cancel it at the horizon.
    ClosedFormCostate particular(s, convention, 0.0, 0.0);
    const double T = s.horizon_days;
    const auto [w1, w2] = particular.eigenvalues();
    const double ratio = (s.v_hu - s.v_uinf) / s.v_hu;
    const double c2 = -particular.d3() * std::exp(-s.r * T) / (ratio * std::exp(w2 * T));
    const double c1 =
        -(c2 * std::exp(w2 * T) + particular.b0() * std::exp(-s.r * T)) * std::exp(-w1 * T);
    return ClosedFormCostate(s, convention, c1, c2);
}

ClosedFormCostate closed_form_lambda23(const Scenario& s, AdjointConvention convention,
                                       ExplicitAmplitudes boundary) {
    require_separation(s, convention);
    return ClosedFormCostate(s, convention, boundary.c1, boundary.c2);
}

std::vector<Vec<2>> numeric_lambda23(const Scenario& s, AdjointConvention convention,
                                     const Vec<2>& terminal, const TimeGrid& grid) {
    const double sign = convention == AdjointConvention::paper ? 1.0 : -1.0;
    auto rhs = [&](double t, const Vec<2>& y) {
        const double discount = std::exp(-s.r * t);
        return Vec<2>{sign * (-s.v_hu * y[0] + s.v_hu * y[1] + s.beta_h * discount),
                      sign * (-s.v_uinf * y[1] + s.beta_u * discount)};
    };
    return integrate<2>(rhs, terminal, grid, Direction::backward);
}

ForcingTerm::ForcingTerm(const Scenario& s, const ClosedFormCostate& costate)
    : k1_(s.v_qh * costate.c1()),
      k2_(s.v_qh * costate.c2()),
      k3_(s.v_qh * costate.b0() + s.beta_q),
      omega1_(costate.eigenvalues()[0]),
      omega2_(costate.eigenvalues()[1]),
      r_(s.r) {
    bound_.Q = std::abs(k1_) + std::abs(k2_) + std::abs(k3_);
    bound_.theta = std::min({-omega1_, -omega2_, r_});
}

double ForcingTerm::operator()(double t) const {
    return k1_ * std::exp(omega1_ * t) + k2_ * std::exp(omega2_ * t) + k3_ * std::exp(-r_ * t);
}

ForcingTerm K_of_t(const Scenario& s, const ClosedFormCostate& costate) {
    return ForcingTerm(s, costate);
}

}  // namespace pandexit
