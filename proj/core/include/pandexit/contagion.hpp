#pragma once

#include <memory>
#include <stdexcept>
#include <string_view>

#include "pandexit/scenario.hpp"

namespace pandexit {

/// First and second partial derivatives of the contagion rate m(q, a).
struct ContagionPartials {
    double dm_dq = 0.0;
    double dm_da = 0.0;
    double d2m_dq2 = 0.0;
    double d2m_da2 = 0.0;
    double d2m_dqda = 0.0;
};

/// Inflow rate into quarantine m(q, a) driven by released workers a.
///
/// Implementations must keep dm/da strictly increasing in a for q >= 0, so
/// that the first-order condition of the control can be inverted by a
/// monotone root search.
class ContagionModel {
  public:
    virtual ~ContagionModel() = default;

    virtual std::string_view kind() const = 0;

    /// Persons/day. Throws std::domain_error for negative arguments.
    double rate(double q, double a) const;
    ContagionPartials partials(double q, double a) const;

    /// Unchecked evaluators used on solver hot paths.
    virtual double rate_unchecked(double q, double a) const = 0;
    virtual ContagionPartials partials_unchecked(double q, double a) const = 0;

    double dm_da(double q, double a) const { return partials_unchecked(q, a).dm_da; }
    double dm_dq(double q, double a) const { return partials_unchecked(q, a).dm_dq; }
};

/// m(q, a) = v_qa q a + v_a a^2.
class QuadraticContagion final : public ContagionModel {
  public:
    QuadraticContagion(double v_qa, double v_a) : v_qa_(v_qa), v_a_(v_a) {}

    std::string_view kind() const override { return "quadratic"; }
    double rate_unchecked(double q, double a) const override {
        return v_qa_ * q * a + v_a_ * a * a;
    }
    ContagionPartials partials_unchecked(double q, double a) const override {
        return {v_qa_ * a, v_qa_ * q + 2.0 * v_a_ * a, 0.0, 2.0 * v_a_, v_qa_};
    }

    double v_qa() const { return v_qa_; }
    double v_a() const { return v_a_; }

  private:
    double v_qa_;
    double v_a_;
};

/// Inputs more negative than this are rejected by the checked evaluators;
/// it matches the nonnegativity tolerance applied to trajectories.
inline constexpr double kNegativeTolerance = 1e-9;

bool is_registered_contagion(std::string_view kind);

/// Builds the model registered under spec.kind. Throws std::invalid_argument
/// for unknown kinds.
std::unique_ptr<ContagionModel> make_contagion(const ContagionSpec& spec);

}  // namespace pandexit
