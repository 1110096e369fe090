#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tsusy/spatial.hpp"

using namespace tsusy;
using cd = std::complex<double>;

namespace {

void expect_spinor(const Spinor& got, cd a, cd b) {
    EXPECT_EQ(got[0], a);
    EXPECT_EQ(got[1], b);
}

SpatialAnsatz unit_cube(double k1, double k2, std::size_t n) {
    SpatialAnsatz a;
    a.k1 = k1;
    a.k2 = k2;
    a.region = Region::cube(0.0, 1.0, n);
    return a;
}

// Hand-derived: chi_+^dag sigma^j d_j chi_- = (k2 - k1) e^{2 i k2 x2} chi_+^dag chi_+,
// so the normalised residual is sup over interior x2 of |(k2 - k1) e^{2 i k2 x2} + k1 + k2|.
double expected_residual(double k1, double k2, const Region& r) {
    double worst = 0.0;
    for (std::size_t j = 2; j + 2 < r.n[1]; ++j) {
        const double y = r.coordinate(1, j);
        worst = std::max(worst, std::abs((k2 - k1) * std::exp(cd(0.0, 2 * k2 * y)) + (k1 + k2)));
    }
    return worst;
}

} // namespace

TEST(Spatial, PauliActionOnBasis) {
    const auto& s = pauli_matrices();
    const Spinor ep = basis_spinor(+1), em = basis_spinor(-1);
    expect_spinor(act(s[0], em), 1.0, 0.0);
    expect_spinor(act(s[0], ep), 0.0, 1.0);
    expect_spinor(act(s[1], em), cd(0, -1), 0.0);
    expect_spinor(act(s[1], ep), 0.0, cd(0, 1));
    expect_spinor(act(s[2], ep), 1.0, 0.0);
    expect_spinor(act(s[2], em), 0.0, -1.0);
    EXPECT_EQ(inner(ep, ep), 1.0);
    EXPECT_EQ(inner(em, ep), 0.0);
}

TEST(Spatial, PauliProductRule) {
    // sigma_a sigma_b = delta_ab + i eps_abc sigma_c
    const auto& s = pauli_matrices();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int col = 0; col < 2; ++col) {
                const Spinor e = basis_spinor(col == 0 ? 1 : -1);
                const Spinor lhs = act(s[a], act(s[b], e));
                Spinor rhs{a == b ? e[0] : 0.0, a == b ? e[1] : 0.0};
                if (a != b) {
                    const int c = 3 - a - b;
                    const double eps = ((b - a + 3) % 3 == 1) ? 1.0 : -1.0;
                    const Spinor sc = act(s[c], e);
                    rhs = {cd(0, eps) * sc[0], cd(0, eps) * sc[1]};
                }
                EXPECT_EQ(lhs[0], rhs[0]);
                EXPECT_EQ(lhs[1], rhs[1]);
            }
}

TEST(Spatial, IdentityHoldsWithoutTransverseMomentum) {
    const auto r = ansatz_residual(unit_cube(1.0, 0.0, 64));
    EXPECT_LE(r.residual_plus, 1e-8);
    EXPECT_LE(r.residual_minus, 1e-8);
    EXPECT_DOUBLE_EQ(r.k, 1.0);
}

TEST(Spatial, FourthOrderUnderRefinement) {
    const auto study = ansatz_refinement(unit_cube(1.0, 0.0, 16), {16, 32, 64});
    ASSERT_EQ(study.residuals.size(), 3u);
    EXPECT_GT(study.order, 3.8);
    EXPECT_LT(study.order, 4.3);
    EXPECT_GT(study.residuals[0].worst(), study.residuals[2].worst());
}

TEST(Spatial, GaussianProfileIsAnnihilated) {
    auto a = unit_cube(2.0, 0.0, 64);
    a.f = AxialProfile::gaussian(1.0);
    const auto r = ansatz_residual(a);
    EXPECT_LE(r.worst(), 1e-6);
}

TEST(Spatial, TabulatedProfile) {
    std::vector<double> z, f;
    for (int i = 0; i <= 40; ++i) {
        z.push_back(i / 40.0);
        f.push_back(1.0 + 0.5 * std::sin(3.0 * z.back()));
    }
    auto a = unit_cube(1.0, 0.0, 48);
    a.f = AxialProfile::tabulated(z, f);
    EXPECT_LE(ansatz_residual(a).worst(), 1e-7);
    a.region.hi[2] = 1.5;
    EXPECT_THROW(ansatz_residual(a), Error);
}

TEST(Spatial, AnalyticDerivativesAreExactWithoutTransverseMomentum) {
    auto a = unit_cube(1.5, 0.0, 16);
    a.f = AxialProfile::gaussian(0.3, 0.5);
    a.derivatives = Derivatives::Analytic;
    EXPECT_LE(ansatz_residual(a).worst(), 1e-14);
}

TEST(Spatial, TransverseMomentumResidualMatchesHandDerivation) {
    for (auto [k1, k2] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{0.5, 3.0}}) {
        auto a = unit_cube(k1, k2, 32);
        const double expect = expected_residual(k1, k2, a.region);
        a.derivatives = Derivatives::Analytic;
        const auto exact = ansatz_residual(a);
        EXPECT_NEAR(exact.residual_plus, expect, 1e-12 * expect);
        EXPECT_NEAR(exact.residual_minus, expect, 1e-12 * expect);
        a.derivatives = Derivatives::FiniteDifference;
        a.region.n = {64, 64, 64};
        EXPECT_NEAR(ansatz_residual(a).worst(), expected_residual(k1, k2, a.region), 1e-5 * expect);
    }
    // k1 = k2 = 1: the left side vanishes identically, so the residual is k itself.
    auto a = unit_cube(1.0, 1.0, 32);
    a.derivatives = Derivatives::Analytic;
    EXPECT_NEAR(ansatz_residual(a).worst(), 2.0, 1e-12);
}

TEST(Spatial, ScalingFLeavesResidualUnchanged) {
    for (double k2 : {0.0, 0.7}) {
        auto a = unit_cube(1.3, k2, 24);
        a.f = AxialProfile::gaussian(0.4, 0.3);
        const auto base = ansatz_residual(a);
        for (double c : {-3.0, 1e-3, 250.0}) {
            auto b = a;
            b.f = a.f.scaled(c);
            const auto r = ansatz_residual(b);
            EXPECT_NEAR(r.residual_plus, base.residual_plus, 1e-12 + 1e-9 * base.residual_plus);
            EXPECT_NEAR(r.residual_minus, base.residual_minus, 1e-12 + 1e-9 * base.residual_minus);
        }
    }
}

TEST(Spatial, Errors) {
    auto a = unit_cube(1.0, 0.0, 16);
    a.region.hi[1] = 0.0;
    EXPECT_THROW(ansatz_residual(a), Error);
    a = unit_cube(1.0, 0.0, 15);
    EXPECT_THROW(ansatz_residual(a), Error);
    a = unit_cube(1.0, 0.0, 16);
    a.f = AxialProfile::constant(0.0);
    try {
        ansatz_residual(a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Underflow);
    }
    EXPECT_THROW(AxialProfile::gaussian(0.0), Error);
}
