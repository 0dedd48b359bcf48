#include <gtest/gtest.h>

#include <cmath>

#include "pandexit/diagnostics.hpp"
#include "pandexit/oracle.hpp"
#include "support.hpp"

using namespace pandexit;

namespace {

Scenario hessian_scenario(double v_qa, double v_a) {
    Scenario s = fixtures::small_scenario();
    s.alpha = 0.5;
    s.A = 1;
    s.r = 0.05;
    s.contagion = {"quadratic", v_qa, v_a};
    return s;
}

// Largest eigenvalue of the full 4x4 Hessian by Jacobi rotation.
double largest_eigenvalue(const HessianNode& n) {
    const std::vector<double> m{n.h11, 0, 0, n.h14, 0, 0, 0, 0, 0, 0, 0, 0, n.h41, 0, 0, n.h44};
    return fixtures::jacobi_eigenvalues(m, 4).back();
}

}  // namespace

TEST(Hessian, DiagonalBlockIsSemidefinite) {
    const Scenario s = hessian_scenario(0, 0.1);
    const QuadraticContagion m(0, 0.1);
    const auto n = hessian_at(0, 1, 1, 1, s, m);
    EXPECT_EQ(n.h11, 0.0);
    EXPECT_EQ(n.h14, 0.0);
    EXPECT_NEAR(n.h44, -0.45, 1e-15);
    EXPECT_TRUE(n.negative_semidefinite);
    EXPECT_LE(largest_eigenvalue(n), kSemidefiniteTolerance);
}

TEST(Hessian, CrossTermBreaksSemidefiniteness) {
    const Scenario s = hessian_scenario(0.2, 0.1);
    const QuadraticContagion m(0.2, 0.1);
    const auto n = hessian_at(0, 1, 1, 1, s, m);
    EXPECT_NEAR(n.h14, -0.2, 1e-15);
    EXPECT_EQ(n.h14, n.h41);
    EXPECT_NEAR(n.h11 * n.h44 - n.h14 * n.h41, -0.04, 1e-15);
    EXPECT_FALSE(n.negative_semidefinite);
    EXPECT_GT(largest_eigenvalue(n), 0.0);
}

TEST(Hessian, ZeroCostateLeavesProductionCurvature) {
    const Scenario s = hessian_scenario(0.2, 0.1);
    const QuadraticContagion m(0.2, 0.1);
    const auto n = hessian_at(0, 3, 4, 0, s, m);
    EXPECT_EQ(n.h11, 0.0);
    EXPECT_EQ(n.h14, 0.0);
    EXPECT_NEAR(n.h44, 0.5 * -0.5 * std::pow(4.0, -1.5), 1e-15);
    EXPECT_TRUE(n.negative_semidefinite);
}

TEST(Hessian, LeadingMinorsOfFullMatrix) {
    const Scenario s = hessian_scenario(0.2, 0.1);
    const QuadraticContagion m(0.2, 0.1);
    const auto n = hessian_at(0, 1, 1, 1, s, m);
    // Rows 2 and 3 are zero, so only the first minor can be nonzero.
    EXPECT_EQ(n.leading_minors[0], n.h11);
    EXPECT_EQ(n.leading_minors[1], 0.0);
    EXPECT_EQ(n.leading_minors[2], 0.0);
    EXPECT_EQ(n.leading_minors[3], 0.0);
}

TEST(HessianProperty, FlagMatchesEigenvalueOracle) {
    fixtures::Gen g(61);
    int definite = 0, indefinite = 0;
    for (int k = 0; k < 500; ++k) {
        const bool cross = g.coin();
        const double v_qa = cross ? g.log_uniform(1e-6, 1) : 0.0;
        const double v_a = g.log_uniform(1e-6, 1);
        Scenario s = hessian_scenario(v_qa, v_a);
        s.alpha = g.uniform(0.05, 0.95);
        s.A = g.log_uniform(0.1, 10);
        const QuadraticContagion m(v_qa, v_a);
        const double t = g.uniform(0, 90), q = g.uniform(0, 1e3), a = g.log_uniform(1e-3, 1e3);
        const double l1 = g.coin() ? g.log_uniform(1e-3, 1e3) : 0.0;
        const auto n = hessian_at(t, q, a, l1, s, m);
        EXPECT_EQ(n.h14, n.h41);
        const bool oracle = largest_eigenvalue(n) <= kSemidefiniteTolerance;
        EXPECT_EQ(n.negative_semidefinite, oracle);
        // Positive eigenvalue of [[0, b], [b, c]] with c < 0.
        const double b = -l1 * v_qa, c = n.h44;
        const double positive = 2 * b * b / (std::sqrt(c * c + 4 * b * b) - c);
        if (positive > kSemidefiniteTolerance) {
            EXPECT_FALSE(n.negative_semidefinite);
            ++indefinite;
        } else {
            EXPECT_TRUE(n.negative_semidefinite);
            ++definite;
        }
    }
    EXPECT_GT(definite, 100);
    EXPECT_GT(indefinite, 100);
}

TEST(HessianCheck, SkipsIdleNodesAndFlagsFirstViolation) {
    const Scenario s = fixtures::small_scenario();
    const auto model = make_contagion(s.contagion);
    Trajectory t = simulate_levels(std::vector<double>{0, 4}, s);
    for (auto& n : t.nodes) n.lambda1 = 1.0;
    const auto report = hessian_check(t, s, *model);
    std::size_t idle = 0;
    for (const auto& n : t.nodes) idle += n.a == 0.0;
    EXPECT_EQ(report.skipped, idle);
    EXPECT_EQ(report.nodes.size() + idle, t.nodes.size());
    EXPECT_FALSE(report.negative_semidefinite);
    ASSERT_TRUE(report.first_violation_t.has_value());
    EXPECT_NEAR(*report.first_violation_t, 5.0, 1e-9);
}

TEST(Rebound, NoControlMeansNoWarning) {
    Scenario s = fixtures::small_scenario();
    s.q0 = 10;
    s.v_qh = 0.05;
    const Trajectory t = simulate_levels(std::vector<double>{0}, s);
    EXPECT_NEAR(t.nodes.front().d, -0.5, 1e-15);
    const auto r = rebound_monitor(t, 1e-3);
    EXPECT_FALSE(r.warning);
    EXPECT_FALSE(r.warning_t.has_value());
    for (double d : r.d) EXPECT_LT(d, 0.0);
}

TEST(Rebound, WarningBracketsAnalyticCrossing) {
    // With v_qa = 0 and a constant control, d(t) = (c - v_qh q0) e^{-v_qh t}
    // where c = v_a a^2. Choosing c puts the crossing of -eps at t = 7.5.
    const double eps = 0.1, v_qh = 0.2, q0 = 100, t_cross = 7.5;
    const double c = v_qh * q0 - eps * std::exp(v_qh * t_cross);
    Scenario s = fixtures::small_scenario();
    s.q0 = q0;
    s.v_qh = v_qh;
    s.contagion = {"quadratic", 0.0, c};
    const Trajectory t = simulate_levels(std::vector<double>{1.0}, s);
    // d stays negative and rises toward zero, so the warning is the crossing.
    const auto r = rebound_monitor(t, eps);
    ASSERT_TRUE(r.warning);
    EXPECT_GE(*r.warning_t, t_cross - t.step_days);
    EXPECT_LE(*r.warning_t, t_cross + t.step_days);
}

TEST(Rebound, NeedsToHaveBeenBelowFirst) {
    const std::vector<double> t{0, 1, 2, 3};
    EXPECT_FALSE(rebound_monitor(t, std::vector<double>{0.5, 0.2, -0.0001, 0.3}, 1e-3).warning);
    const auto r = rebound_monitor(t, std::vector<double>{0.5, -0.2, -0.0001, 0.3}, 1e-3);
    ASSERT_TRUE(r.warning);
    EXPECT_EQ(*r.warning_t, 2.0);
    EXPECT_THROW(rebound_monitor(t, std::vector<double>{1, 2}, 1e-3), std::invalid_argument);
}

TEST(ReboundProperty, NodeSlopeIsStateDerivative) {
    fixtures::Gen g(62);
    for (int k = 0; k < 20; ++k) {
        const Scenario s = fixtures::small_scenario();
        std::vector<double> levels(static_cast<std::size_t>(g.integer(1, 10)));
        for (auto& v : levels) v = g.uniform(0, s.a_max);
        const Trajectory t = simulate_levels(levels, s);
        for (const auto& n : t.nodes) {
            const double m = s.contagion.v_qa * n.q * n.a + s.contagion.v_a * n.a * n.a;
            const double expected = m - s.v_qh * n.q;
            EXPECT_LE(std::abs(n.d - expected), 1e-12 * (m + s.v_qh * n.q));
        }
    }
}

TEST(Lyapunov, StableDiagonal) {
    auto rhs = [](double, const Vec<2>& x) { return Vec<2>{-0.1 * x[0], -0.2 * x[1]}; };
    const auto e = lyapunov_largest<2>(rhs, {1, 1}, 400, 1, 0.01);
    EXPECT_NEAR(e.exponent, -0.1, 0.005);
    EXPECT_EQ(e.renormalizations, 400u);
    EXPECT_EQ(e.renorm_interval, 1.0);
}

TEST(Lyapunov, UnstableDirection) {
    auto rhs = [](double, const Vec<2>& x) { return Vec<2>{0.05 * x[0], -0.2 * x[1]}; };
    const auto e = lyapunov_largest<2>(rhs, {1, 1}, 400, 1, 0.01);
    EXPECT_NEAR(e.exponent, 0.05, 0.0025);
}

TEST(Lyapunov, CascadeRecoversSlowestRate) {
    Scenario s = fixtures::small_scenario();
    s.contagion = {"quadratic", 0, 0};
    const auto model = make_contagion(s.contagion);
    auto rhs = [&](double t, const Vec<3>& x) { return state_rhs(t, x, 0.0, s, *model); };
    const auto e = lyapunov_largest<3>(rhs, {s.q0, s.h0, s.u0}, 600, 1, 0.01);
    const double slowest = std::min({s.v_qh, s.v_hu, s.v_uinf});
    EXPECT_NEAR(e.exponent, -slowest, 0.05 * slowest);
}

TEST(LyapunovProperty, InsensitiveToPerturbationAndInterval) {
    fixtures::Gen g(63);
    for (int k = 0; k < 20; ++k) {
        const double l1 = g.uniform(-0.3, 0.1), l2 = l1 - g.uniform(0.05, 0.3);
        auto rhs = [&](double, const Vec<2>& x) { return Vec<2>{l1 * x[0], l2 * x[1]}; };
        const auto base = lyapunov_largest<2>(rhs, {1, 1}, 400, 1, 0.01, 1e-8);
        const auto half_delta = lyapunov_largest<2>(rhs, {1, 1}, 400, 1, 0.01, 5e-9);
        const auto half_interval = lyapunov_largest<2>(rhs, {1, 1}, 400, 0.5, 0.01, 1e-8);
        EXPECT_NEAR(half_delta.exponent, base.exponent, 0.02 * std::abs(base.exponent));
        EXPECT_NEAR(half_interval.exponent, base.exponent, 0.02 * std::abs(base.exponent));
        EXPECT_NEAR(base.exponent, l1, 0.05 * std::abs(l1) + 1e-3);
    }
}

TEST(Lyapunov, EscapeIsReported) {
    auto blowup = [](double, const Vec<1>& x) { return Vec<1>{x[0] * x[0]}; };
    EXPECT_THROW(lyapunov_largest<1>(blowup, {1}, 10, 0.5, 0.01), OrbitEscape);

    auto decay = [](double, const Vec<1>& x) { return Vec<1>{-1.0}; };
    std::function<bool(const Vec<1>&)> positive = [](const Vec<1>& x) { return x[0] > 0; };
    try {
        lyapunov_largest<1>(decay, {0.9}, 10, 0.5, 0.01, 1e-8, positive);
        FAIL() << "expected escape";
    } catch (const OrbitEscape& e) {
        EXPECT_NEAR(e.t(), 1.0, 1e-9);
    }

    const Scenario s = fixtures::small_scenario();
    const auto model = make_contagion(s.contagion);
    EXPECT_THROW(lyapunov_largest(s, *model, {0.0, 1, 1, 1}, 10, 1), OrbitEscape);
    EXPECT_THROW(lyapunov_largest<1>(decay, {1}, 0.1, 0.5, 0.01), std::invalid_argument);
}

TEST(Lyapunov, ReducedSystemEstimateIsFinite) {
    Scenario s = fixtures::small_scenario();
    s.numerics.adjoint_convention = AdjointConvention::paper;
    const auto model = make_contagion(s.contagion);
    const auto e = lyapunov_largest(s, *model, {1.0, s.q0, s.h0, s.u0}, 20, 1);
    EXPECT_TRUE(std::isfinite(e.exponent));
    EXPECT_EQ(e.renormalizations, 20u);
}
