#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace pandexit {

/// Sign pairing between the Hamiltonian's costate terms and the costate ODEs.
///
/// `paper` integrates dλ/dt = -∂H/∂x for H = f - λᵀg, without a sign flip.
/// `textbook` integrates dλ/dt = +∂H/∂x, the maximum-principle adjoint for
/// cost-type costates, with terminal transversality λ(T) = 0.
enum class AdjointConvention { textbook, paper };

std::string_view to_string(AdjointConvention convention);
std::optional<AdjointConvention> parse_convention(std::string_view text);

struct ContagionSpec {
    std::string kind = "quadratic";
    double v_qa = 0.0;  // quarantine x worker contagion, 1/(person day)
    double v_a = 0.0;   // worker x worker contagion, 1/(person day)

    bool operator==(const ContagionSpec&) const = default;
};

struct NumericsPolicy {
    double step_days = 0.01;
    AdjointConvention adjoint_convention = AdjointConvention::textbook;
    double shooting_tol = 1e-8;
    double root_tol = 1e-12;
    double fbsm_relaxation = 0.5;
    int max_iters = 500;
    double eps_sep = 1e-6;
    double rebound_epsilon = 1e-3;

    bool operator==(const NumericsPolicy&) const = default;
};

/// Optional paper-literal boundary data. When absent the solvers use
/// terminal-zero transversality for every costate.
struct CostateBoundary {
    std::optional<double> c1;
    std::optional<double> c2;
    std::optional<double> lambda1_0;

    bool operator==(const CostateBoundary&) const = default;
    bool explicit_amplitudes() const { return c1.has_value() && c2.has_value(); }
    bool empty() const { return !c1 && !c2 && !lambda1_0; }
};

/// Every model parameter of one reopening scenario. Units: days, persons,
/// abstract currency. Immutable once returned by `validate`.
struct Scenario {
    std::string label;
    double tau = 0.0;  // age cutoff in years; metadata only

    double A = 1.0;
    double alpha = 0.5;
    double r = 0.0;
    double a_max = 1.0;

    double beta_q = 0.0;
    double beta_h = 0.0;
    double beta_u = 0.0;

    double v_qh = 0.1;
    double v_hu = 0.1;
    double v_uinf = 0.1;

    ContagionSpec contagion;

    double horizon_days = 1.0;
    double q0 = 0.0;
    double h0 = 0.0;
    double u0 = 0.0;

    NumericsPolicy numerics;
    CostateBoundary boundary;

    bool operator==(const Scenario&) const = default;
};

struct FieldError {
    std::string field;
    std::string message;

    bool operator==(const FieldError&) const = default;
};

/// Either a fully valid Scenario or the complete list of problems found.
struct ValidationResult {
    std::optional<Scenario> scenario;
    std::vector<FieldError> errors;

    bool ok() const { return scenario.has_value(); }
};

/// Thrown by `load_scenario_file` when the file cannot be read.
class ScenarioIoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Checks a parsed scenario document against every model invariant.
ValidationResult validate(const nlohmann::json& raw);

/// Parses JSON text and validates it. Syntax errors are reported as a
/// field error on "document".
ValidationResult parse_scenario(std::string_view text);

/// Reads and validates a scenario file. Throws ScenarioIoError if the file
/// cannot be opened.
ValidationResult load_scenario_file(const std::string& path);

/// Re-checks an already constructed Scenario (e.g. one built in code).
std::vector<FieldError> check_invariants(const Scenario& s);

/// Closed-form costates need the three decay rates separated; returns the
/// violated pairs (empty when separable) for the given convention.
std::vector<FieldError> check_rate_separation(const Scenario& s, AdjointConvention convention);

nlohmann::json to_json(const Scenario& s);

/// Deterministic 16-hex-digit identifier of the canonical serialization.
std::string scenario_digest(const Scenario& s);

}  // namespace pandexit
