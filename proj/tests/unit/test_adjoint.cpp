#include <gtest/gtest.h>

#include <cmath>

#include "pandexit/adjoint.hpp"
#include "support.hpp"

using namespace pandexit;

namespace {

// The parameter set used for the B0 example.
Scenario b0_scenario() {
    Scenario s = fixtures::small_scenario();
    s.v_hu = 0.2;
    s.v_uinf = 0.1;
    s.r = 0.05;
    s.beta_h = 1;
    s.beta_u = 2;
    s.beta_q = 1;
    s.v_qh = 0.05;
    s.horizon_days = 40;
    return s;
}

// Independent backward integration of (λ2, λ3) from zero terminal values.
std::vector<double> oracle_lambda23_at_zero(const Scenario& s, AdjointConvention conv, double h) {
    const double sign = conv == AdjointConvention::paper ? 1.0 : -1.0;
    fixtures::Field f = [&](double t, const fixtures::State& y) {
        const double d = std::exp(-s.r * t);
        return fixtures::State{sign * (-s.v_hu * y[0] + s.v_hu * y[1] + s.beta_h * d),
                               sign * (-s.v_uinf * y[1] + s.beta_u * d)};
    };
    const long n = std::lround(s.horizon_days / h);
    return fixtures::rk4(f, s.horizon_days, {0.0, 0.0}, -s.horizon_days / n, n);
}

}  // namespace

TEST(CostateRhs, Lambda3Equation) {
    Scenario s = b0_scenario();
    s.beta_u = 2;
    s.v_uinf = 0.1;
    s.r = 0.05;
    const QuadraticContagion m(0.1, 0.1);
    const auto paper = costate_rhs(0, {1, 1, 1}, {0, 0, 40}, 1, s, m, AdjointConvention::paper);
    EXPECT_NEAR(paper[2], -2.0, 1e-14);
    const auto text = costate_rhs(0, {1, 1, 1}, {0, 0, 40}, 1, s, m, AdjointConvention::textbook);
    EXPECT_NEAR(text[2], 2.0, 1e-14);

    const Scenario z = fixtures::zero_cost(s);
    const auto eq = costate_rhs(3, {5, 2, 1}, {0, 0, 0}, 2, z, m, AdjointConvention::paper);
    EXPECT_EQ(eq, (CostateVec{0, 0, 0}));
}

TEST(CostateRhsProperty, PaperMatchesExpandedFormAndTextbookIsNegation) {
    fixtures::Gen g(31);
    for (int k = 0; k < 500; ++k) {
        Scenario s = fixtures::random_scenario(g);
        const QuadraticContagion m(s.contagion.v_qa, s.contagion.v_a);
        const double t = g.uniform(0, 100), q = g.uniform(0, 1e4), a = g.uniform(0, 1e3);
        const CostateVec lam{g.uniform(-50, 50), g.uniform(-50, 50), g.uniform(-50, 50)};
        const double d = std::exp(-s.r * t);
        const double m_q = s.contagion.v_qa * a;
        const CostateVec expanded{(m_q - s.v_qh) * lam[0] + s.v_qh * lam[1] + s.beta_q * d,
                                 -s.v_hu * lam[1] + s.v_hu * lam[2] + s.beta_h * d,
                                 -s.v_uinf * lam[2] + s.beta_u * d};
        const auto paper = costate_rhs(t, {q, 1, 1}, lam, a, s, m, AdjointConvention::paper);
        const auto text = costate_rhs(t, {q, 1, 1}, lam, a, s, m, AdjointConvention::textbook);
        for (int i = 0; i < 3; ++i) {
            EXPECT_NEAR(paper[i], expanded[i], 1e-12 * (1 + std::abs(expanded[i])));
            EXPECT_EQ(text[i], -paper[i]);
        }
    }
}

TEST(ClosedForm, ParticularSolutionOnly) {
    // c2 = 0 gives λ3(0) = D3 = β_u/(v_uinf - r) = 40.
    const Scenario s = b0_scenario();
    const auto cf = closed_form_lambda23(s, AdjointConvention::paper, ExplicitAmplitudes{0, 0});
    EXPECT_NEAR(cf.d3(), 40.0, 1e-12);
    EXPECT_NEAR(cf.lambda3(0), 40.0, 1e-12);
    EXPECT_NEAR(cf.lambda3(10), 40 * std::exp(-0.5), 1e-12);
    EXPECT_NEAR(cf.lambda3(10), 24.261, 5e-4);
}

TEST(ClosedForm, ParticularB0) {
    EXPECT_NEAR(particular_b0(1, 2, 0.2, 0.1, 0.05), 60.0, 1e-12);
    const Scenario s = b0_scenario();
    const auto cf = closed_form_lambda23(s, AdjointConvention::paper, ExplicitAmplitudes{0, 0});
    EXPECT_NEAR(cf.b0(), 60.0, 1e-12);
    // Undetermined coefficients: B0 e^{-rt}, D3 e^{-rt} solve the λ2 equation.
    const double lhs = -s.r * cf.b0();
    const double rhs = -s.v_hu * cf.b0() + s.v_hu * cf.d3() + s.beta_h;
    EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::max(std::abs(lhs), std::abs(s.v_hu * cf.b0())));
}

TEST(ClosedForm, EigenStructure) {
    const Scenario s = b0_scenario();
    const auto paper = closed_form_lambda23(s, AdjointConvention::paper, TerminalZero{});
    EXPECT_EQ(paper.eigenvalues()[0], -0.2);
    EXPECT_EQ(paper.eigenvalues()[1], -0.1);
    const auto text = closed_form_lambda23(s, AdjointConvention::textbook, TerminalZero{});
    EXPECT_EQ(text.eigenvalues()[0], 0.2);
    EXPECT_EQ(text.eigenvalues()[1], 0.1);
    const auto v = paper.eigenvectors();
    EXPECT_EQ(v[0], (Vec<2>{1, 0}));
    EXPECT_NEAR(v[1][0], 0.2, 1e-15);
    EXPECT_NEAR(v[1][1], 0.1, 1e-15);
    for (const auto& cf : {paper, text}) {
        EXPECT_NEAR(cf.lambda2(s.horizon_days), 0.0, 1e-9 * std::abs(cf.lambda2(0)));
        EXPECT_NEAR(cf.lambda3(s.horizon_days), 0.0, 1e-9 * std::abs(cf.lambda3(0)));
    }
}

TEST(ClosedForm, TextbookLambda3AtZero) {
    Scenario s = b0_scenario();
    s.beta_u = 2;
    s.v_uinf = 0.1;
    s.r = 0.05;
    s.horizon_days = 40;
    const auto cf = closed_form_lambda23(s, AdjointConvention::textbook, TerminalZero{});
    const auto oracle = oracle_lambda23_at_zero(s, AdjointConvention::textbook, 1e-3);
    EXPECT_NEAR(oracle[1], 13.3003, 5e-5);
    EXPECT_NEAR(cf.lambda3(0), oracle[1], 1e-9 * oracle[1]);
    EXPECT_NEAR(cf.lambda2(0), oracle[0], 1e-9 * std::abs(oracle[0]));
}

TEST(ClosedForm, RefusesNearSingularSeparation) {
    Scenario s = b0_scenario();
    s.v_uinf = s.v_hu;
    EXPECT_THROW(closed_form_lambda23(s, AdjointConvention::textbook, TerminalZero{}),
                 SingularSeparation);
    Scenario t = b0_scenario();
    t.r = t.v_uinf;
    EXPECT_THROW(closed_form_lambda23(t, AdjointConvention::paper, TerminalZero{}),
                 SingularSeparation);
}

TEST(NumericCostate, MatchesClosedFormOnB0Example) {
    const Scenario s = b0_scenario();
    const TimeGrid grid(s.horizon_days, 0.01);
    for (auto conv : {AdjointConvention::paper, AdjointConvention::textbook}) {
        const auto cf = closed_form_lambda23(s, conv, TerminalZero{});
        const auto num = numeric_lambda23(s, conv, {0, 0}, grid);
        for (std::size_t i = 0; i < grid.size(); i += 7) {
            const double t = grid.at(i);
            EXPECT_NEAR(num[i][0], cf.lambda2(t), 1e-6 * std::abs(cf.lambda2(0)) + 1e-12);
            EXPECT_NEAR(num[i][1], cf.lambda3(t), 1e-6 * std::abs(cf.lambda3(0)) + 1e-12);
        }
    }
}

TEST(NumericCostate, HomogeneousAndDegenerateCases) {
    Scenario s = b0_scenario();
    s.beta_h = s.beta_u = 0;
    const TimeGrid grid(s.horizon_days, 0.1);
    for (const auto& v : numeric_lambda23(s, AdjointConvention::paper, {0, 0}, grid)) {
        EXPECT_EQ(v, (Vec<2>{0, 0}));
    }
    Scenario d = b0_scenario();
    d.v_uinf = d.v_hu;
    for (const auto& v : numeric_lambda23(d, AdjointConvention::paper, {0, 0}, grid)) {
        EXPECT_TRUE(std::isfinite(v[0]) && std::isfinite(v[1]));
    }
}

TEST(ClosedFormProperty, MatchesIntegrationBothConventions) {
    fixtures::Gen g(32);
    for (int k = 0; k < 100; ++k) {
        const Scenario s = fixtures::with_costate_draw(fixtures::small_scenario(),
                                                       fixtures::random_costate_draw(g));
        const TimeGrid grid(s.horizon_days, 0.01);
        for (auto conv : {AdjointConvention::paper, AdjointConvention::textbook}) {
            const auto cf = closed_form_lambda23(s, conv, TerminalZero{});
            const auto num = numeric_lambda23(s, conv, {0, 0}, grid);
            double diff = 0, scale = 0;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const double t = grid.at(i);
                diff = std::max({diff, std::abs(num[i][0] - cf.lambda2(t)),
                                 std::abs(num[i][1] - cf.lambda3(t))});
                scale = std::max({scale, std::abs(cf.lambda2(t)), std::abs(cf.lambda3(t))});
            }
            EXPECT_LE(diff, 1e-6 * scale) << "draw " << k;
        }
    }
}

TEST(ClosedFormProperty, SatisfiesOwnOde) {
    fixtures::Gen g(33);
    for (int k = 0; k < 100; ++k) {
        const Scenario s = fixtures::with_costate_draw(fixtures::small_scenario(),
                                                       fixtures::random_costate_draw(g));
        const QuadraticContagion m(0, 1);
        for (auto conv : {AdjointConvention::paper, AdjointConvention::textbook}) {
            const auto cf = g.coin() ? closed_form_lambda23(s, conv, TerminalZero{})
                                     : closed_form_lambda23(s, conv, ExplicitAmplitudes{g.uniform(-5, 5), g.uniform(-5, 5)});
            for (int j = 0; j <= 50; ++j) {
                const double t = s.horizon_days * j / 50.0;
                const CostateVec lam{0, cf.lambda2(t), cf.lambda3(t)};
                const auto rhs = costate_rhs(t, {0, 0, 0}, lam, 0, s, m, conv);
                const double scale = std::max({std::abs(s.v_hu * lam[1]), std::abs(s.v_hu * lam[2]),
                                               std::abs(s.v_uinf * lam[2]), s.beta_h, s.beta_u});
                EXPECT_LE(std::abs(cf.dlambda2(t) - rhs[1]), 1e-9 * scale);
                EXPECT_LE(std::abs(cf.dlambda3(t) - rhs[2]), 1e-9 * scale);
            }
        }
    }
}

TEST(Forcing, ParticularOnlyExample) {
    const Scenario s = b0_scenario();
    const auto cf = closed_form_lambda23(s, AdjointConvention::paper, ExplicitAmplitudes{0, 0});
    const ForcingTerm K = K_of_t(s, cf);
    EXPECT_NEAR(K(0), 4.0, 1e-12);
    EXPECT_NEAR(K(7), 4.0 * std::exp(-0.35), 1e-12);
    EXPECT_NEAR(K.bound().Q, 4.0, 1e-12);
    EXPECT_NEAR(K.bound().theta, 0.05, 1e-15);
}

TEST(Forcing, ZeroCosts) {
    const Scenario s = fixtures::zero_cost(b0_scenario());
    const auto cf = closed_form_lambda23(s, AdjointConvention::paper, ExplicitAmplitudes{0, 0});
    const ForcingTerm K = K_of_t(s, cf);
    EXPECT_EQ(K.bound().Q, 0.0);
    for (double t : {0.0, 1.0, 17.5}) EXPECT_EQ(K(t), 0.0);
}

TEST(ForcingProperty, ExponentialBoundHolds) {
    fixtures::Gen g(34);
    for (int k = 0; k < 100; ++k) {
        Scenario s = fixtures::with_costate_draw(fixtures::small_scenario(),
                                                 fixtures::random_costate_draw(g));
        s.beta_q = g.uniform(0, 10);
        s.v_qh = g.uniform(0.01, 1);
        const auto conv = g.coin() ? AdjointConvention::paper : AdjointConvention::textbook;
        const auto cf = g.coin() ? closed_form_lambda23(s, conv, TerminalZero{})
                                 : closed_form_lambda23(s, conv, ExplicitAmplitudes{g.uniform(-5, 5), g.uniform(-5, 5)});
        const ForcingTerm K = K_of_t(s, cf);
        const auto [Q, theta] = K.bound();
        for (int j = 0; j <= 500; ++j) {
            const double t = 5 * s.horizon_days * j / 500.0;
            const double bound = Q * std::exp(-theta * t);
            EXPECT_LE(std::abs(K(t)), bound * (1 + 1e-12)) << "draw " << k << " t " << t;
        }
    }
}
