#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qbem/errors.hpp"
#include "qbem/power.hpp"
#include "qbem/spectral.hpp"

using namespace qbem;

namespace {

CMat random_psd(int n, std::mt19937_64& rng, double scale) {
    std::normal_distribution<double> nd;
    CMat A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = cplx(nd(rng), nd(rng));
    return scale * A * A.adjoint();
}

// Table whose points satisfy J_M + J_S = Gamma / 2 pi exactly, with complex off-diagonals
// that cancel between the two parts.
SpectralTable synthetic_table(int n, std::mt19937_64& rng) {
    SpectralTable t;
    t.mu.assign(n, 1.0);
    for (int k = 0; k < 12; ++k) {
        SpectralPoint p;
        p.omega = 0.3 + 0.05 * k;
        CMat G = random_psd(n, rng, 1.0).real().cast<cplx>();
        CMat M = random_psd(n, rng, 0.1);
        // keep the imaginary part of J_M, let J_S absorb it
        p.JM = M;
        p.JS = G / (2.0 * kPi) - M;
        p.Gamma = G.real();
        t.points.push_back(p);
    }
    return t;
}

}  // namespace

TEST(Thermal, BoseEinsteinWeights) {
    EXPECT_NEAR(thermal_weight(1.0, 1.0), 0.5819767068693265, 1e-15);
    EXPECT_EQ(thermal_weight(kInfBeta, 0.5), 0.0);
    EXPECT_EQ(thermal_weight(1000.0, 1.0), 0.0);
    // classical limit: n -> 1/(beta w) - 1/2
    const double b = 1e-4, w = 0.5;
    EXPECT_NEAR(thermal_weight(b, w), 1.0 / (b * w) - 0.5, 1e-3);
    EXPECT_THROW(thermal_weight(1.0, 0.0), ConfigError);
    EXPECT_THROW(thermal_weight(-1.0, 1.0), ConfigError);
}

TEST(Thermal, EqualTemperaturesCollapseToGamma) {
    std::mt19937_64 rng(11);
    SpectralTable t = synthetic_table(3, rng);
    const double beta = 2.3;
    EffectiveSpectral eff = dress(t, beta, beta);
    ASSERT_EQ(eff.n_negative, t.points.size());
    ASSERT_EQ(eff.omega.size(), 2 * t.points.size());
    const std::size_t n = t.points.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& p = t.points[k];
        double nb = 1.0 / std::expm1(beta * p.omega);
        CMat pos = (1.0 + nb) * p.Gamma.cast<cplx>() / (2.0 * kPi);
        CMat neg = nb * p.Gamma.cast<cplx>() / (2.0 * kPi);
        EXPECT_DOUBLE_EQ(eff.omega[n + k], p.omega);
        EXPECT_DOUBLE_EQ(eff.omega[n - 1 - k], -p.omega);
        EXPECT_LT((eff.J[n + k] - pos).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((eff.J[n - 1 - k] - neg).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Thermal, ZeroTemperatureIsBareSum) {
    std::mt19937_64 rng(12);
    SpectralTable t = synthetic_table(2, rng);
    EffectiveSpectral eff = dress(t, kInfBeta, kInfBeta);
    EXPECT_EQ(eff.n_negative, 0u);
    ASSERT_EQ(eff.J.size(), t.points.size());
    for (std::size_t k = 0; k < t.points.size(); ++k) {
        CMat expect = t.points[k].JM + t.points[k].JS;
        EXPECT_EQ((eff.J[k] - expect).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Thermal, HotMediumOnlyDressesMediumPart) {
    std::mt19937_64 rng(13);
    SpectralTable t = synthetic_table(2, rng);
    EffectiveSpectral eff = dress(t, 1.0, kInfBeta);
    const std::size_t n = t.points.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& p = t.points[k];
        double nm = thermal_weight(1.0, p.omega);
        EXPECT_LT((eff.J[n + k] - ((1.0 + nm) * p.JM + p.JS)).norm(), 1e-14);
        EXPECT_LT((eff.J[n - 1 - k] - nm * p.JM.conjugate()).norm(), 1e-14);
    }
}

TEST(Interpolation, LinearInsideZeroOutside) {
    std::mt19937_64 rng(14);
    SpectralTable t = synthetic_table(2, rng);
    EffectiveSpectral eff = dress(t, 3.0, 3.0);
    const std::size_t n = t.points.size();
    CMat mid = eff.at(0.5 * (eff.omega[n + 2] + eff.omega[n + 3]));
    EXPECT_LT((mid - 0.5 * (eff.J[n + 2] + eff.J[n + 3])).norm(), 1e-14);
    EXPECT_LT((eff.at(eff.omega[n + 4]) - eff.J[n + 4]).norm(), 1e-14);
    EXPECT_EQ(eff.at(0.0).norm(), 0.0);   // gap between the branches
    EXPECT_EQ(eff.at(0.1).norm(), 0.0);
    EXPECT_EQ(eff.at(5.0).norm(), 0.0);
    EXPECT_GT(eff.at(-0.4).norm(), 0.0);
    EXPECT_NEAR(resolvable_horizon(eff), kPi / 0.05, 1e-9);
}

TEST(CouplingSqrt, Examples) {
    CMat I = CMat::Identity(2, 2);
    EXPECT_LT((coupling_sqrt(I, {1.0, 1.0}) - I).norm(), 1e-15);
    CMat D = CMat::Zero(2, 2);
    D(0, 0) = 4.0;
    D(1, 1) = 9.0;
    CMat K = coupling_sqrt(D, {1.0, 1.0});
    EXPECT_NEAR(K(0, 0).real(), 2.0, 1e-14);
    EXPECT_NEAR(K(1, 1).real(), 3.0, 1e-14);

    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 5; ++trial) {
        CMat J = random_psd(3, rng, 1e-6);
        std::vector<double> mu = {1e-3, 2e-3, 5e-4};
        CMat Ks = coupling_sqrt(J, mu);
        EXPECT_LT((Ks * Ks.adjoint() - J).norm(), 1e-12 * J.norm());
    }
    // rank-deficient input: tiny negative rounding is clipped
    CVec v(2);
    v << 1.0, cplx(0.0, 1.0);
    CMat R = v * v.adjoint();
    R(0, 0) -= 1e-13;
    CMat Kr = coupling_sqrt(R, {1.0, 1.0});
    EXPECT_LT((Kr * Kr.adjoint() - R).norm(), 1e-6);
    CMat bad = CMat::Identity(2, 2);
    bad(1, 1) = -0.1;
    EXPECT_THROW(coupling_sqrt(bad, {1.0, 1.0}), NumericalError);
}

TEST(Correlator, FlatBandClosedForm) {
    EffectiveSpectral eff;
    eff.mu = {2.0};
    eff.omega = {0.4, 0.9};
    eff.J = {CMat::Constant(1, 1, 3.0), CMat::Constant(1, 1, 3.0)};
    std::vector<double> times = {0.0, 1e-3, 0.7, 5.0, 40.0};
    auto C = correlator(eff, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        double t = times[i];
        cplx exact = t == 0.0 ? cplx(3.0 * 0.5)
                              : 3.0 * (std::exp(-kI * 0.4 * t) - std::exp(-kI * 0.9 * t)) / (kI * t);
        EXPECT_LT(std::abs(C[i](0, 0) - exact / 4.0), 1e-13) << t;
    }
}

TEST(Correlator, BoundedByInitialValueAndContinuous) {
    std::mt19937_64 rng(16);
    SpectralTable t = synthetic_table(2, rng);
    EffectiveSpectral eff = dress(t, 2.0, 5.0);
    std::vector<double> times;
    for (int i = 0; i <= 200; ++i) times.push_back(0.25 * i);
    auto C = correlator(eff, times);
    for (int d = 0; d < 2; ++d) {
        EXPECT_NEAR(C[0](d, d).imag(), 0.0, 1e-14);
        for (const auto& c : C) EXPECT_LE(std::abs(c(d, d)), C[0](d, d).real() * (1.0 + 1e-12));
    }
    // hermiticity C(-t) = C(t)^dagger, and continuity across the series switch in the exact integral
    auto Cm = correlator(eff, {-3.0, 3.0});
    EXPECT_LT((Cm[0] - Cm[1].adjoint()).norm(), 1e-13);
    double tsw = 1e-2 / 0.05;  // |z| = t * h crosses 1e-2
    auto Cs = correlator(eff, {tsw * (1 - 1e-6), tsw, tsw * (1 + 1e-6)});
    EXPECT_LT((Cs[0] - 2.0 * Cs[1] + Cs[2]).norm(), 1e-11 * Cs[1].norm());
}

TEST(Spectral, FromPowersProjection) {
    PowerMatrices pm;
    pm.omega = 0.6;
    pm.P_abs = CMat(2, 2);
    pm.P_abs << 1.0, cplx(0.2, 0.1), cplx(0.21, -0.1), 2.0;
    pm.P_rad = CMat::Identity(2, 2);
    pm.P_em = RMat(2, 2);
    pm.P_em << 2.0, 0.3, 0.3, 3.0;
    SpectralPoint p = spectral_from_powers(pm);
    EXPECT_EQ((p.JM - p.JM.adjoint()).norm(), 0.0);
    EXPECT_NEAR(p.JM(0, 1).real(), 2.0 / (kPi * 0.6) * 0.205, 1e-15);
    EXPECT_GT(p.asym_M, 0.0);
    EXPECT_NEAR(p.Gamma(1, 1), 4.0 / 0.6 * 3.0, 1e-14);
    pm.omega = 0.0;
    EXPECT_THROW(spectral_from_powers(pm), ConfigError);
}

TEST(Spectral, TableRescaleAndChecks) {
    std::mt19937_64 rng(17);
    SpectralTable t = synthetic_table(2, rng);
    SpectralTable r = t.rescaled({1e-3, 2e-3});
    EXPECT_NEAR(r.points[3].JS(0, 1).real(), 2e-6 * t.points[3].JS(0, 1).real(), 1e-20);
    EXPECT_NEAR(r.j0(), 1e-6 / (6.0 * kPi * kPi), 1e-22);
    EXPECT_THROW(t.rescaled({1.0}), ConfigError);
    std::swap(t.points[1], t.points[2]);
    EXPECT_THROW(t.check(), ConfigError);
}
