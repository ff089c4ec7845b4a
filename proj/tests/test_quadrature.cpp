#include <gtest/gtest.h>

#include <cmath>

#include "qbem/quadrature.hpp"

using namespace qbem;

namespace {

// Exact integral of x^a y^b over the reference triangle (0,0),(1,0),(0,1): a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
    return std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
}

double rule_integral(const quad::TriangleRule& r, int a, int b) {
    double s = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) {
        double x = r.bary[q][1], y = r.bary[q][2];
        s += r.w[q] * std::pow(x, a) * std::pow(y, b);
    }
    return 0.5 * s;  // weights are normalised to unit sum, reference area is 1/2
}

}  // namespace

TEST(Quadrature, SevenPointWeightsAndExactness) {
    const auto& r = quad::seven_point();
    double ws = 0.0;
    for (double w : r.w) ws += w;
    EXPECT_NEAR(ws, 1.0, 1e-14);
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b)
            EXPECT_NEAR(rule_integral(r, a, b), monomial_integral(a, b), 1e-14) << a << "," << b;
}

TEST(Quadrature, ConicalExactToDegree2nMinus2) {
    for (int n : {2, 4, 6}) {
        auto r = quad::conical(n);
        ASSERT_EQ(r.size(), static_cast<std::size_t>(n * n));
        for (int a = 0; a <= 2 * n - 2; ++a)
            for (int b = 0; a + b <= 2 * n - 2; ++b)
                EXPECT_NEAR(rule_integral(r, a, b), monomial_integral(a, b), 1e-13) << n << ": " << a << "," << b;
    }
}

TEST(Quadrature, BarycentricCoordinatesInsideTriangle) {
    auto r = quad::conical(5);
    for (const auto& b : r.bary) {
        EXPECT_NEAR(b.sum(), 1.0, 1e-14);
        EXPECT_GT(b.minCoeff(), 0.0);
    }
}

TEST(Quadrature, GaussLegendre) {
    std::vector<double> x, w;
    quad::gauss_legendre(8, x, w);
    double ws = 0.0;
    for (double v : w) ws += v;
    EXPECT_NEAR(ws, 2.0, 1e-14);
    for (int p = 0; p <= 15; ++p) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], p);
        double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
        EXPECT_NEAR(s, exact, 1e-14) << p;
    }
}

TEST(Quadrature, SphereProductIntegratesHarmonics) {
    auto s = quad::sphere_product(12);
    double ws = 0.0, zz = 0.0, xy = 0.0, x4 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_NEAR(s.dir[i].norm(), 1.0, 1e-14);
        ws += s.w[i];
        zz += s.w[i] * s.dir[i].z() * s.dir[i].z();
        xy += s.w[i] * s.dir[i].x() * s.dir[i].y();
        x4 += s.w[i] * std::pow(s.dir[i].x(), 4);
    }
    EXPECT_NEAR(ws, 4.0 * kPi, 1e-12);
    EXPECT_NEAR(zz, 4.0 * kPi / 3.0, 1e-12);
    EXPECT_NEAR(xy, 0.0, 1e-12);
    EXPECT_NEAR(x4, 4.0 * kPi / 5.0, 1e-12);
}
