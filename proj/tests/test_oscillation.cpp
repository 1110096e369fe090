#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "tsusy/oscillation.hpp"

using namespace tsusy;
using cd = std::complex<double>;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

} // namespace

TEST(Oscillation, MixingMatrix) {
    const auto id = mix_states(0.0);
    EXPECT_EQ(id.block[0][0], 1.0);
    EXPECT_EQ(id.block[0][1], 0.0);
    const auto half = mix_states(std::numbers::pi / 4);
    EXPECT_NEAR(half.block[0][0], half.block[0][1], 1e-15);
    EXPECT_LE(half.orthogonality_defect(), 1e-15);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2);
    for (int i = 0; i < 100; ++i) EXPECT_NEAR(mix_states(angle(rng)).determinant(), 1.0, 1e-15);
    EXPECT_THROW(mix_states(-0.1), Error);
    EXPECT_THROW(mix_states(2.0), Error);
}

TEST(Oscillation, ThetaFromSin2) {
    EXPECT_NEAR(MixingConfig::from_sin2_2theta(1.0).theta, std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(MixingConfig::from_sin2_2theta(0.75).sin2_2theta(), 0.75, 1e-15);
    EXPECT_THROW(MixingConfig::from_sin2_2theta(1.5), Error);
}

TEST(Oscillation, AmplitudeTrivialCases) {
    std::vector<cd> same{1.0, cd(0.3, 0.2), cd(-1, 4)};
    for (auto a : transition_amplitude(0.4, same, same)) EXPECT_EQ(a, cd(0.0));
    std::vector<cd> other{1.0, 2.0, 3.0};
    EXPECT_EQ(transition_amplitude(0.4, same, other).front(), cd(0.0));
    EXPECT_THROW(transition_amplitude(0.4, same, std::vector<cd>{1.0}), Error);
}

TEST(Oscillation, AmplitudeConstantMassTwoLevel) {
    ScenarioParams p;
    p.profile = MassProfile::constant(3.0);
    p.k = 4.0;
    p.t1 = 3.0;
    p.max_samples = 4001;
    const auto a = solve_coupled(p);
    const auto amp = transition_amplitude(std::numbers::pi / 4, a.psi_plus, a.psi_minus);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = std::sin(5 * a.times[i]);
        EXPECT_NEAR(std::norm(amp[i]), 9.0 / 25.0 * s * s, 1e-8);
    }
    // The pipeline on the same trajectory gives the same numbers.
    const auto pr = probability_from_trajectory(std::numbers::pi / 4, a);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(pr.probability[i], std::norm(amp[i]), 1e-7);
}

TEST(Oscillation, PipelineEqualsAmplitudeSquaredInBothConventions) {
    for (auto conv : {Convention::Physical, Convention::Wick}) {
        ScenarioParams p;
        p.profile = MassProfile::sinusoidal(1.0, 0.5);
        p.k = 2.0;
        p.convention = conv;
        p.t1 = conv == Convention::Wick ? 1.5 : 6.0;
        p.max_samples = 3001;
        p.rel_tol = 1e-11;
        const auto a = solve_coupled(p);
        const double theta = 0.3;
        const auto amp = transition_amplitude(theta, a.psi_plus, a.psi_minus);
        const auto pr = probability_from_trajectory(theta, a);
        double scale = 0.0;
        for (auto x : amp) scale = std::max(scale, std::norm(x));
        for (std::size_t i = 0; i < a.size(); ++i)
            EXPECT_NEAR(pr.probability[i], std::norm(amp[i]), 1e-7 * scale) << to_string(conv) << " " << a.times[i];
    }
}

TEST(Oscillation, EqualEnergiesGiveNoOscillation) {
    const auto t = linspace(0, 10, 101);
    std::vector<cd> e(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) e[i] = 3.0 + std::sin(t[i]);
    const auto r = probability_from_E(0.5, e, e, t);
    for (double p : r.probability) EXPECT_EQ(p, 0.0);
}

TEST(Oscillation, ConstantSplittingGivesSinSquared) {
    const double m = 0.7;
    const auto t = linspace(0, 10, 1001);
    std::vector<cd> ep(t.size(), cd(-m)), em(t.size(), cd(m));
    const auto r = probability_from_E(std::numbers::pi / 4, ep, em, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double s = std::sin(m * t[i]);
        EXPECT_NEAR(r.probability[i], s * s, 1e-13);
        EXPECT_EQ(r.alpha[i], 0.0);
        EXPECT_EQ(r.beta[i], 0.0);
    }
}

TEST(Oscillation, SyntheticComplexEnergies) {
    // E+- = k +- 0.01 i cos t: alpha = rho = 0, beta = -0.01 sin t.
    const double k = 5.0, theta = 0.6;
    const auto t = linspace(0, 10, 2001);
    std::vector<cd> ep(t.size()), em(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        ep[i] = cd(k, 0.01 * std::cos(t[i]));
        em[i] = cd(k, -0.01 * std::cos(t[i]));
    }
    const auto r = probability_from_E(theta, ep, em, t);
    const double s2 = std::pow(std::sin(2 * theta), 2);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double sb = std::sinh(-0.01 * std::sin(t[i]));
        EXPECT_NEAR(r.probability[i], s2 * sb * sb, 1e-10);
    }
}

TEST(Oscillation, SimpsonOddIndicesAreAccurate) {
    const auto t = linspace(0, 1, 10);   // odd sample count on purpose
    std::vector<double> f(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) f[i] = t[i] * t[i];
    const auto I = cumulative_simpson(t, f);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(I[i], std::pow(t[i], 3) / 3, 1e-15);
    std::vector<double> nonuniform{0.0, 0.1, 0.35, 0.4, 0.9, 1.0};
    std::vector<double> g;
    for (double x : nonuniform) g.push_back(2 * x + 1);
    const auto J = cumulative_simpson(nonuniform, g);
    for (std::size_t i = 0; i < nonuniform.size(); ++i)
        EXPECT_NEAR(J[i], nonuniform[i] * nonuniform[i] + nonuniform[i], 1e-14);
    EXPECT_THROW(cumulative_simpson(std::vector<double>{0, 1}, std::vector<double>{0, 1}), Error);
}

TEST(Oscillation, ClosedFormExamples) {
    const auto massive = probability_massive(std::numbers::pi / 6, MassProfile::constant(2.0), {std::numbers::pi / 4});
    EXPECT_NEAR(massive.probability[0], 0.75, 1e-15);

    const auto reduced = probability_ur_reduced(std::numbers::pi / 4, 0.1, 1.0, 10.0, {std::numbers::pi / 2});
    EXPECT_NEAR(reduced.probability[0], 2.5e-5, 1e-20);
}

TEST(Oscillation, URFullMatchesPipelineOnClosedFormEnergies) {
    const double m0 = 0.01, k = 10.0, L = 1e-3;
    const auto t = linspace(0, std::numbers::pi / L, 4001);
    const auto E = limit_E_ur_sinusoidal(m0, L, k, t);
    const auto pipeline = probability_from_E(std::numbers::pi / 4, E.E_plus, E.E_minus, t);
    const auto full = probability_ur_full(std::numbers::pi / 4, m0, L, k, t);
    double peak = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        peak = std::max(peak, full.probability[i]);
        worst = std::max(worst, std::abs(full.probability[i] - pipeline.probability[i]));
    }
    EXPECT_LE(worst, 0.01 * peak);
}

TEST(Oscillation, ReducedFormBoundedByFull) {
    const double m0 = 0.1, k = 1e3, L = 1e-4;
    const auto t = linspace(0, std::numbers::pi / L, 101);
    const auto full = probability_ur_full(0.5, m0, L, k, t);
    const auto reduced = probability_ur_reduced(0.5, m0, L, k, t);
    EXPECT_TRUE(reduced.applicable);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(reduced.probability[i], 1.1 * full.probability[i] + 1e-300);
}

TEST(Oscillation, ClosedFormGuards) {
    EXPECT_THROW(probability_ur_full(0.5, 0.1, 20.0, 10.0, {0.0}), Error);
    EXPECT_THROW(probability_ur_full(0.5, 0.1, 1.0, 10.0, {4.0}), Error);
    EXPECT_THROW(probability_ur_reduced(0.5, 0.1, 1.0, 10.0, {-1.0}), Error);
    EXPECT_FALSE(probability_ur_reduced(0.5, 0.1, 1.0, 10.0, {1.0}).applicable);   // lambda not << m0
}

TEST(Oscillation, ExoticEnergiesAreFlaggedNotClamped) {
    const auto t = linspace(0, 5, 51);
    std::vector<cd> ep(t.size(), cd(0, -3)), em(t.size(), cd(1, -3));
    const auto r = probability_from_E(std::numbers::pi / 4, ep, em, t);
    EXPECT_TRUE(r.exceeds_unity);
    EXPECT_GT(r.probability.back(), 1.0);
}

TEST(Oscillation, RandomisedProperties) {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> u(-3.0, 3.0), ang(0.0, std::numbers::pi / 2), small(-0.2, 0.2);
    const auto t = linspace(0, 4, 41);
    for (int trial = 0; trial < 1000; ++trial) {
        const double theta = ang(rng);
        const double a1 = u(rng), a2 = u(rng), w1 = u(rng), w2 = u(rng);
        std::vector<cd> ep(t.size()), em(t.size()), fp(t.size()), fm(t.size());
        const bool complex_case = trial % 2 == 1;
        const double g = complex_case ? small(rng) : 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            // Opposite imaginary parts keep alpha = 0 for the complex half of the trials.
            ep[i] = cd(a1 + std::sin(w1 * t[i]), g * std::cos(w2 * t[i]));
            em[i] = cd(a2 + std::cos(w2 * t[i]), -g * std::cos(w2 * t[i]));
            fp[i] = -em[i];
            fm[i] = -ep[i];
        }
        const auto r = probability_from_E(theta, ep, em, t);
        const auto flipped = probability_from_E(theta, fp, fm, t);
        const double s2 = std::pow(std::sin(2 * theta), 2);
        EXPECT_EQ(r.probability.front(), 0.0);
        for (std::size_t i = 0; i < t.size(); ++i) {
            EXPECT_NEAR(r.probability[i], flipped.probability[i], 1e-13);
            if (!complex_case) {
                EXPECT_GE(r.probability[i], 0.0);
                EXPECT_LE(r.probability[i], s2 * (1 + 1e-15));
            }
        }
        const auto zero = probability_from_E(0.0, ep, em, t);
        for (double p : zero.probability) EXPECT_EQ(p, 0.0);
    }
}

TEST(Oscillation, ThetaScaling) {
    const auto t = linspace(0, 4, 41);
    std::vector<cd> ep(t.size()), em(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        ep[i] = cd(1.0, 0.1 * std::sin(t[i]));
        em[i] = cd(2.0 + t[i], 0.05);
    }
    std::vector<double> base;
    for (double theta : {std::numbers::pi / 8, std::numbers::pi / 6, std::numbers::pi / 4}) {
        const auto r = probability_from_E(theta, ep, em, t);
        const double s2 = std::pow(std::sin(2 * theta), 2);
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (base.size() < t.size()) base.push_back(r.probability[i] / s2);
            else EXPECT_NEAR(r.probability[i] / s2, base[i], 1e-14);
        }
    }
}

TEST(Oscillation, EveryClosedFormStartsAtZero) {
    const std::vector<double> t{0.0, 0.5, 1.0};
    EXPECT_EQ(probability_massive(0.4, MassProfile::sinusoidal(1, 1), t).probability[0], 0.0);
    EXPECT_EQ(probability_ur_full(0.4, 0.1, 1.0, 10.0, t).probability[0], 0.0);
    EXPECT_EQ(probability_ur_reduced(0.4, 0.1, 1.0, 10.0, t).probability[0], 0.0);
}
