#include "pandexit/contagion.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>

namespace pandexit {

namespace {

void check_domain(double q, double a) {
    if (!(q >= -kNegativeTolerance) || !(a >= -kNegativeTolerance)) {
        throw std::domain_error("contagion rate needs q >= 0 and a >= 0 (q = " +
                                std::to_string(q) + ", a = " + std::to_string(a) + ")");
    }
}

using Factory = std::unique_ptr<ContagionModel> (*)(const ContagionSpec&);

const std::array<std::pair<std::string_view, Factory>, 1> kRegistry{{
    {"quadratic",
     [](const ContagionSpec& spec) -> std::unique_ptr<ContagionModel> {
         return std::make_unique<QuadraticContagion>(spec.v_qa, spec.v_a);
     }},
}};

}  // namespace

double ContagionModel::rate(double q, double a) const {
    check_domain(q, a);
    return rate_unchecked(q, a);
}

ContagionPartials ContagionModel::partials(double q, double a) const {
    check_domain(q, a);
    return partials_unchecked(q, a);
}

bool is_registered_contagion(std::string_view kind) {
    for (const auto& [name, factory] : kRegistry) {
        if (name == kind) return true;
    }
    return false;
}

std::unique_ptr<ContagionModel> make_contagion(const ContagionSpec& spec) {
    for (const auto& [name, factory] : kRegistry) {
        if (name == spec.kind) return factory(spec);
    }
    throw std::invalid_argument("unknown contagion kind '" + spec.kind + "'");
}

}  // namespace pandexit
