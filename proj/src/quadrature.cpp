#include "qbem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qbem::quad {

const TriangleRule& seven_point() {
    static const TriangleRule rule = [] {
        TriangleRule r;
        r.degree = 5;
        r.bary.push_back({1.0 / 3, 1.0 / 3, 1.0 / 3});
        r.w.push_back(0.225);
        const double a1 = 0.059715871789769820, b1 = 0.470142064105115090;
        const double w1 = 0.132394152788506181;
        const double a2 = 0.797426985353087322, b2 = 0.101286507323456339;
        const double w2 = 0.125939180544827153;
        for (auto [a, b, w] : {std::tuple{a1, b1, w1}, std::tuple{a2, b2, w2}}) {
            r.bary.push_back({a, b, b});
            r.bary.push_back({b, a, b});
            r.bary.push_back({b, b, a});
            for (int k = 0; k < 3; ++k) r.w.push_back(w);
        }
        return r;
    }();
    return rule;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

TriangleRule conical(int n) {
    static std::mutex mtx;
    static std::map<int, TriangleRule> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    TriangleRule r;
    r.degree = 2 * n - 2;
    // Duffy map (u, v) in [0,1]^2 -> (s, t) = (u, v (1 - u)), jacobian (1 - u).
    for (int i = 0; i < n; ++i) {
        double u = 0.5 * (x[i] + 1.0);
        for (int j = 0; j < n; ++j) {
            double v = 0.5 * (x[j] + 1.0);
            double s = u, t = v * (1.0 - u);
            r.bary.push_back({1.0 - s - t, s, t});
            r.w.push_back(0.25 * w[i] * w[j] * (1.0 - u) * 2.0);
        }
    }
    cache[n] = r;
    return r;
}

SphereRule sphere_product(int n_theta) {
    std::vector<double> x, w;
    gauss_legendre(n_theta, x, w);
    int n_phi = 2 * n_theta;
    SphereRule r;
    for (int i = 0; i < n_theta; ++i) {
        double ct = x[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < n_phi; ++j) {
            double phi = 2.0 * kPi * (j + 0.5) / n_phi;
            r.dir.push_back({st * std::cos(phi), st * std::sin(phi), ct});
            r.w.push_back(w[i] * 2.0 * kPi / n_phi);
        }
    }
    return r;
}

}  // namespace qbem::quad
