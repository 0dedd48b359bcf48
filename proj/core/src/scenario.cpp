#include "pandexit/scenario.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "pandexit/contagion.hpp"

namespace pandexit {

using nlohmann::json;

std::string_view to_string(AdjointConvention convention) {
    return convention == AdjointConvention::paper ? "paper" : "textbook";
}

std::optional<AdjointConvention> parse_convention(std::string_view text) {
    if (text == "textbook") return AdjointConvention::textbook;
    if (text == "paper") return AdjointConvention::paper;
    return std::nullopt;
}

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Walks one JSON object, pulling typed fields and recording every problem.
class Reader {
  public:
    Reader(const json& obj, std::string prefix, std::vector<FieldError>& errors)
        : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

    std::string path(std::string_view key) const {
        return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
    }

    void number(std::string_view key, double& out, bool required = true) {
        seen_.insert(std::string(key));
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            if (required) errors_.push_back({path(key), "missing field"});
            return;
        }
        if (!it->is_number()) {
            errors_.push_back({path(key), "must be a number"});
            return;
        }
        double v = it->get<double>();
        if (!std::isfinite(v)) {
            errors_.push_back({path(key), "must be finite"});
            return;
        }
        out = v;
    }

    void optional_number(std::string_view key, std::optional<double>& out) {
        seen_.insert(std::string(key));
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        if (!it->is_number() || !std::isfinite(it->get<double>())) {
            errors_.push_back({path(key), "must be a finite number"});
            return;
        }
        out = it->get<double>();
    }

    void integer(std::string_view key, int& out) {
        seen_.insert(std::string(key));
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        if (it->is_number_integer() ||
            (it->is_number_float() && std::floor(it->get<double>()) == it->get<double>())) {
            double v = it->get<double>();
            if (v < 1 || v > 1e9) {
                errors_.push_back({path(key), "must be an integer in [1, 1e9]"});
                return;
            }
            out = static_cast<int>(v);
            return;
        }
        errors_.push_back({path(key), "must be an integer"});
    }

    void string(std::string_view key, std::string& out, bool required = true) {
        seen_.insert(std::string(key));
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            if (required) errors_.push_back({path(key), "missing field"});
            return;
        }
        if (!it->is_string()) {
            errors_.push_back({path(key), "must be a string"});
            return;
        }
        out = it->get<std::string>();
    }

    /// Returns the nested object or nullptr after recording the problem.
    const json* object(std::string_view key, bool required = true) {
        seen_.insert(std::string(key));
        auto it = obj_.find(key);
        if (it == obj_.end()) {
            if (required) errors_.push_back({path(key), "missing field"});
            return nullptr;
        }
        if (!it->is_object()) {
            errors_.push_back({path(key), "must be an object"});
            return nullptr;
        }
        return &*it;
    }

    void reject_unknown() {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.contains(key)) errors_.push_back({path(key), "unknown field"});
        }
    }

  private:
    const json& obj_;
    std::string prefix_;
    std::vector<FieldError>& errors_;
    std::set<std::string> seen_;
};

void check_rate(std::vector<FieldError>& errors, const char* field, const char* name, double v) {
    if (!(v > 0.0 && v <= 1.0)) {
        errors.push_back({field, std::string(name) + " must lie in (0, 1], got " + fmt_num(v)});
    }
}

}  // namespace

std::vector<FieldError> check_rate_separation(const Scenario& s, AdjointConvention convention) {
    std::vector<FieldError> errors;
    const double eps = s.numerics.eps_sep;
    auto require = [&](double a, double b, const char* what) {
        if (std::abs(a - b) <= eps) {
            errors.push_back({"numerics.eps_sep",
                              std::string("closed-form costates are singular: |") + what + "| = " +
                                  fmt_num(std::abs(a - b)) + " is not above eps_sep = " +
                                  fmt_num(eps)});
        }
    };
    require(s.v_hu, s.v_uinf, "v_hu - v_uinf");
    if (convention == AdjointConvention::paper) {
        require(s.v_hu, s.r, "v_hu - r");
        require(s.v_uinf, s.r, "v_uinf - r");
    }
    return errors;
}

std::vector<FieldError> check_invariants(const Scenario& s) {
    std::vector<FieldError> errors;
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) {
        errors.push_back({"economy.alpha",
                          "alpha must lie strictly between 0 and 1, got " + fmt_num(s.alpha)});
    }
    if (!(s.A > 0.0)) errors.push_back({"economy.A", "A must be positive"});
    if (!(s.r >= 0.0)) errors.push_back({"economy.r", "r must be nonnegative"});
    if (!(s.a_max > 0.0)) errors.push_back({"economy.a_max", "a_max must be positive"});
    if (!(s.beta_q >= 0.0)) errors.push_back({"costs.beta_q", "beta_q must be nonnegative"});
    if (!(s.beta_h >= 0.0)) errors.push_back({"costs.beta_h", "beta_h must be nonnegative"});
    if (!(s.beta_u >= 0.0)) errors.push_back({"costs.beta_u", "beta_u must be nonnegative"});
    check_rate(errors, "flows.v_qh", "v_qh", s.v_qh);
    check_rate(errors, "flows.v_hu", "v_hu", s.v_hu);
    check_rate(errors, "flows.v_uinf", "v_uinf", s.v_uinf);

    if (!is_registered_contagion(s.contagion.kind)) {
        errors.push_back({"contagion.kind", "unknown contagion kind '" + s.contagion.kind + "'"});
    }
    if (!(s.contagion.v_qa >= 0.0)) {
        errors.push_back({"contagion.v_qa", "v_qa must be nonnegative"});
    }
    if (!(s.contagion.v_a > 0.0)) {
        errors.push_back({"contagion.v_a", "v_a must be positive"});
    }

    if (!(s.horizon_days > 0.0)) errors.push_back({"horizon_days", "horizon_days must be positive"});
    if (!(s.q0 >= 0.0)) errors.push_back({"initial.q0", "q0 must be nonnegative"});
    if (!(s.h0 >= 0.0)) errors.push_back({"initial.h0", "h0 must be nonnegative"});
    if (!(s.u0 >= 0.0)) errors.push_back({"initial.u0", "u0 must be nonnegative"});

    const auto& n = s.numerics;
    if (!(n.step_days > 0.0)) {
        errors.push_back({"numerics.step_days", "step_days must be positive"});
    } else if (s.horizon_days > 0.0 && n.step_days > s.horizon_days / 10.0) {
        errors.push_back({"numerics.step_days", "step_days must not exceed horizon_days / 10"});
    }
    if (!(n.shooting_tol > 0.0)) errors.push_back({"numerics.shooting_tol", "must be positive"});
    if (!(n.root_tol > 0.0)) errors.push_back({"numerics.root_tol", "must be positive"});
    if (!(n.fbsm_relaxation > 0.0 && n.fbsm_relaxation < 1.0)) {
        errors.push_back({"numerics.fbsm_relaxation", "must lie strictly between 0 and 1"});
    }
    if (n.max_iters < 1) errors.push_back({"numerics.max_iters", "must be at least 1"});
    if (!(n.eps_sep > 0.0)) errors.push_back({"numerics.eps_sep", "must be positive"});
    if (!(n.rebound_epsilon > 0.0)) {
        errors.push_back({"numerics.rebound_epsilon", "must be positive"});
    }

    if (s.boundary.c1.has_value() != s.boundary.c2.has_value()) {
        errors.push_back({"boundary", "c1 and c2 must be given together"});
    }
    if (n.adjoint_convention == AdjointConvention::paper && n.eps_sep > 0.0) {
        auto sep = check_rate_separation(s, AdjointConvention::paper);
        errors.insert(errors.end(), sep.begin(), sep.end());
    }
    return errors;
}

ValidationResult validate(const json& raw) {
    ValidationResult result;
    auto& errors = result.errors;
    if (!raw.is_object()) {
        errors.push_back({"document", "scenario must be a JSON object"});
        return result;
    }

    Scenario s;
    Reader top(raw, "", errors);
    top.string("label", s.label);
    top.number("tau", s.tau);
    top.number("horizon_days", s.horizon_days);

    if (const json* economy = top.object("economy")) {
        Reader r(*economy, "economy", errors);
        r.number("A", s.A);
        r.number("alpha", s.alpha);
        r.number("r", s.r);
        r.number("a_max", s.a_max);
        r.reject_unknown();
    }
    if (const json* costs = top.object("costs")) {
        Reader r(*costs, "costs", errors);
        r.number("beta_q", s.beta_q);
        r.number("beta_h", s.beta_h);
        r.number("beta_u", s.beta_u);
        r.reject_unknown();
    }
    if (const json* flows = top.object("flows")) {
        Reader r(*flows, "flows", errors);
        r.number("v_qh", s.v_qh);
        r.number("v_hu", s.v_hu);
        r.number("v_uinf", s.v_uinf);
        r.reject_unknown();
    }
    if (const json* contagion = top.object("contagion")) {
        Reader r(*contagion, "contagion", errors);
        r.string("kind", s.contagion.kind);
        r.number("v_qa", s.contagion.v_qa);
        r.number("v_a", s.contagion.v_a);
        r.reject_unknown();
    }
    if (const json* initial = top.object("initial")) {
        Reader r(*initial, "initial", errors);
        r.number("q0", s.q0);
        r.number("h0", s.h0);
        r.number("u0", s.u0);
        r.reject_unknown();
    }
    if (const json* numerics = top.object("numerics", false)) {
        Reader r(*numerics, "numerics", errors);
        auto& n = s.numerics;
        r.number("step_days", n.step_days, false);
        std::string convention(to_string(n.adjoint_convention));
        r.string("adjoint_convention", convention, false);
        if (auto parsed = parse_convention(convention)) {
            n.adjoint_convention = *parsed;
        } else {
            errors.push_back({"numerics.adjoint_convention", "must be \"textbook\" or \"paper\""});
        }
        r.number("shooting_tol", n.shooting_tol, false);
        r.number("root_tol", n.root_tol, false);
        r.number("fbsm_relaxation", n.fbsm_relaxation, false);
        r.integer("max_iters", n.max_iters);
        r.number("eps_sep", n.eps_sep, false);
        r.number("rebound_epsilon", n.rebound_epsilon, false);
        r.reject_unknown();
    }
    if (const json* boundary = top.object("boundary", false)) {
        Reader r(*boundary, "boundary", errors);
        r.optional_number("c1", s.boundary.c1);
        r.optional_number("c2", s.boundary.c2);
        r.optional_number("lambda1_0", s.boundary.lambda1_0);
        r.reject_unknown();
    }
    top.reject_unknown();

    // Range checks are only meaningful once every field parsed.
    if (!errors.empty()) return result;
    errors = check_invariants(s);
    if (errors.empty()) result.scenario = std::move(s);
    return result;
}

ValidationResult parse_scenario(std::string_view text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        ValidationResult result;
        result.errors.push_back({"document", "malformed JSON"});
        return result;
    }
    return validate(doc);
}

ValidationResult load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioIoError("cannot open scenario file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

json to_json(const Scenario& s) {
    const auto& n = s.numerics;
    json doc = {
        {"label", s.label},
        {"tau", s.tau},
        {"economy", {{"A", s.A}, {"alpha", s.alpha}, {"r", s.r}, {"a_max", s.a_max}}},
        {"costs", {{"beta_q", s.beta_q}, {"beta_h", s.beta_h}, {"beta_u", s.beta_u}}},
        {"flows", {{"v_qh", s.v_qh}, {"v_hu", s.v_hu}, {"v_uinf", s.v_uinf}}},
        {"contagion",
         {{"kind", s.contagion.kind}, {"v_qa", s.contagion.v_qa}, {"v_a", s.contagion.v_a}}},
        {"horizon_days", s.horizon_days},
        {"initial", {{"q0", s.q0}, {"h0", s.h0}, {"u0", s.u0}}},
        {"numerics",
         {{"step_days", n.step_days},
          {"adjoint_convention", std::string(to_string(n.adjoint_convention))},
          {"shooting_tol", n.shooting_tol},
          {"root_tol", n.root_tol},
          {"fbsm_relaxation", n.fbsm_relaxation},
          {"max_iters", n.max_iters},
          {"eps_sep", n.eps_sep},
          {"rebound_epsilon", n.rebound_epsilon}}},
    };
    if (!s.boundary.empty()) {
        json b = json::object();
        if (s.boundary.c1) b["c1"] = *s.boundary.c1;
        if (s.boundary.c2) b["c2"] = *s.boundary.c2;
        if (s.boundary.lambda1_0) b["lambda1_0"] = *s.boundary.lambda1_0;
        doc["boundary"] = std::move(b);
    }
    return doc;
}

std::string scenario_digest(const Scenario& s) {
    // nlohmann::json objects keep keys sorted, so dump() is canonical.
    const std::string canonical = to_json(s).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

}  // namespace pandexit
