#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "pandexit/adjoint.hpp"
#include "pandexit/contagion.hpp"
#include "pandexit/integrator.hpp"
#include "pandexit_cli/cli.hpp"

namespace pandexit::cli {
namespace {

std::string format(const char* fmt, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

// Rates and costs scaled by factors in [0.5, 1.5]; flow rates stay in (0, 1].
Scenario perturbed(const Scenario& base, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> factor(0.5, 1.5);
    auto rate = [&](double v) { return std::min(1.0, v * factor(rng)); };
    Scenario s = base;
    s.v_hu = rate(base.v_hu);
    s.v_uinf = rate(base.v_uinf);
    s.r = base.r * factor(rng);
    s.beta_h = (base.beta_h > 0.0 ? base.beta_h : 1.0) * factor(rng);
    s.beta_u = (base.beta_u > 0.0 ? base.beta_u : 1.0) * factor(rng);
    return s;
}

SuiteResult costate_suite(const Scenario& base, std::mt19937_64& rng) {
    constexpr int kDraws = 100;
    constexpr double kTolerance = 1e-6;
    SuiteResult result{"costate closed form vs integration", true, {}};
    const TimeGrid grid(base.horizon_days, base.numerics.step_days);
    double worst = 0.0;
    int used = 0;
    for (int attempt = 0; used < kDraws && attempt < 20 * kDraws; ++attempt) {
        const Scenario s = perturbed(base, rng);
        if (!check_rate_separation(s, AdjointConvention::textbook).empty() ||
            !check_rate_separation(s, AdjointConvention::paper).empty()) {
            continue;
        }
        for (auto conv : {AdjointConvention::textbook, AdjointConvention::paper}) {
            const auto cf = closed_form_lambda23(s, conv, TerminalZero{});
            const auto num = numeric_lambda23(s, conv, {0.0, 0.0}, grid);
            double diff = 0.0, scale = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double t = grid.at(i);
                diff = std::max({diff, std::abs(cf.lambda2(t) - num[i][0]),
                                 std::abs(cf.lambda3(t) - num[i][1])});
                scale = std::max({scale, std::abs(cf.lambda2(t)), std::abs(cf.lambda3(t))});
            }
            if (scale > 0.0) worst = std::max(worst, diff / scale);
        }
        ++used;
    }
    result.passed = used == kDraws && worst <= kTolerance;
    result.detail = format("%.0f draws, max relative deviation %.3e", used, worst);
    return result;
}

SuiteResult gradient_suite(const Scenario& base, std::mt19937_64& rng) {
    constexpr int kPoints = 1000;
    constexpr double kTolerance = 1e-6;
    SuiteResult result{"contagion partials vs finite differences", true, {}};
    const auto model = make_contagion(base.contagion);
    std::uniform_real_distribution<double> coord(0.0, 1e6);
    const double floor = 1e-12 * (base.contagion.v_qa + base.contagion.v_a);
    double worst = 0.0;
    auto check = [&](double analytic, double numeric) {
        const double err = std::abs(analytic - numeric);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
        worst = std::max(worst, scale > 0.0 ? err / scale : 0.0);
    };
    for (int k = 0; k < kPoints; ++k) {
        const double q = coord(rng);
        const double a = coord(rng);
        const double hq = 1e-5 * std::max(1.0, q);
        const double ha = 1e-5 * std::max(1.0, a);
        const auto p = model->partials_unchecked(q, a);
        auto m = [&](double x, double y) { return model->rate_unchecked(x, y); };
        auto part = [&](double x, double y) { return model->partials_unchecked(x, y); };
        check(p.dm_dq, (m(q + hq, a) - m(q - hq, a)) / (2 * hq));
        check(p.dm_da, (m(q, a + ha) - m(q, a - ha)) / (2 * ha));
        check(p.d2m_dq2, (part(q + hq, a).dm_dq - part(q - hq, a).dm_dq) / (2 * hq));
        check(p.d2m_da2, (part(q, a + ha).dm_da - part(q, a - ha).dm_da) / (2 * ha));
        check(p.d2m_dqda, (part(q, a + ha).dm_dq - part(q, a - ha).dm_dq) / (2 * ha));
    }
    result.passed = worst <= kTolerance;
    result.detail = format("%.0f points, max relative error %.3e", kPoints, worst);
    return result;
}

SuiteResult quadrature_suite(const Scenario& s) {
    SuiteResult result{"quadrature on known integrals", true, {}};
    const TimeGrid grid(s.horizon_days, s.numerics.step_days);
    const double T = grid.horizon();
    const double r = s.r > 0.0 ? s.r : 0.05;
    std::vector<double> discount(grid.size()), cubic(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.at(i);
        discount[i] = std::exp(-r * t);
        cubic[i] = t * t * t;
    }
    const double exact_discount = -std::expm1(-r * T) / r;
    const double rel_discount = std::abs(simpson(discount, grid.step()) - exact_discount) /
                                exact_discount;
    double rel_cubic = 0.0;
    if (grid.intervals() % 2 == 0) {
        const double exact = std::pow(T, 4) / 4.0;
        rel_cubic = std::abs(simpson(cubic, grid.step()) - exact) / exact;
    }
    result.passed = rel_discount <= 1e-9 && rel_cubic <= 1e-10;
    result.detail = format("discount integral rel. error %.3e, cubic rel. error %.3e",
                           rel_discount, rel_cubic);
    return result;
}

}  // namespace

std::vector<SuiteResult> run_verification(const Scenario& s, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<SuiteResult> out;
    out.push_back(costate_suite(s, rng));
    out.push_back(gradient_suite(s, rng));
    out.push_back(quadrature_suite(s));
    return out;
}

}  // namespace pandexit::cli
