#include "qbem/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "qbem/errors.hpp"
#include "qbem/power.hpp"

namespace qbem {

namespace {

double rel_asym(const CMat& A) {
    double n = A.norm();
    return n > 0.0 ? (A - A.adjoint()).norm() / (2.0 * n) : 0.0;
}

CMat hermitian_part(const CMat& A) { return 0.5 * (A + A.adjoint()); }

// (e^z - 1)/z and (e^z (z - 1) + 1)/z^2 with a series near zero.
void phi12(cplx z, cplx& p1, cplx& p2) {
    if (std::abs(z) < 1e-2) {
        cplx t = 1.0;
        p1 = 0.0;
        p2 = 0.0;
        double fact = 1.0;  // (n+1)!
        for (int n = 0; n < 8; ++n) {
            fact *= (n + 1);
            p1 += t / fact;
            p2 += t * static_cast<double>(n + 1) / (fact * (n + 2));
            t *= z;
        }
        return;
    }
    cplx ez = std::exp(z);
    p1 = (ez - 1.0) / z;
    p2 = (ez * (z - 1.0) + 1.0) / (z * z);
}

}  // namespace

SpectralPoint spectral_from_powers(const PowerMatrices& pm) {
    if (!(pm.omega > 0.0)) throw ConfigError("spectral: frequency must be positive");
    SpectralPoint sp;
    sp.omega = pm.omega;
    const double s = 2.0 / (kPi * pm.omega);
    CMat jm = s * pm.P_abs;
    CMat js = s * pm.P_rad;
    RMat g = (4.0 / pm.omega) * pm.P_em;
    sp.asym_M = rel_asym(jm);
    sp.asym_S = rel_asym(js);
    double gn = g.norm();
    sp.asym_G = gn > 0.0 ? (g - g.transpose()).norm() / (2.0 * gn) : 0.0;
    sp.JM = hermitian_part(jm);
    sp.JS = hermitian_part(js);
    sp.Gamma = 0.5 * (g + g.transpose());
    return sp;
}

double SpectralTable::j0() const {
    if (mu.empty()) return 0.0;
    return mu[0] * mu[0] * omega_p * omega_p * omega_p / (6.0 * kPi * kPi);
}

SpectralTable SpectralTable::rescaled(const std::vector<double>& new_mu) const {
    if (new_mu.size() != mu.size()) throw ConfigError("spectral: dipole count mismatch in rescale");
    SpectralTable out = *this;
    out.mu = new_mu;
    const std::size_t n = mu.size();
    for (auto& p : out.points) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double f = new_mu[i] * new_mu[j] / (mu[i] * mu[j]);
                p.JM(i, j) *= f;
                p.JS(i, j) *= f;
                p.Gamma(i, j) *= f;
            }
    }
    return out;
}

void SpectralTable::check() const {
    if (points.empty()) throw ConfigError("spectral: empty frequency grid");
    const auto n = static_cast<Eigen::Index>(mu.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto& p = points[k];
        if (!(p.omega > 0.0)) throw ConfigError("spectral: frequency must be positive");
        if (k > 0 && !(p.omega > points[k - 1].omega))
            throw ConfigError("spectral: frequency grid must be strictly increasing");
        if (p.JM.rows() != n || p.JS.rows() != n || p.Gamma.rows() != n)
            throw ConfigError("spectral: matrix size does not match emitter count");
        if (!p.JM.allFinite() || !p.JS.allFinite() || !p.Gamma.allFinite())
            throw NumericalError("spectral: non-finite entry at omega = " + std::to_string(p.omega));
    }
}

double thermal_weight(double beta, double omega) {
    if (!(omega > 0.0)) throw ConfigError("thermal_weight: frequency must be positive");
    if (!(beta > 0.0)) throw ConfigError("thermal_weight: inverse temperature must be positive");
    if (std::isinf(beta)) return 0.0;
    double x = beta * omega;
    if (x > 700.0) return 0.0;
    return 1.0 / std::expm1(x);
}

EffectiveSpectral dress(const SpectralTable& table, double beta_M, double beta_S) {
    table.check();
    EffectiveSpectral eff;
    eff.mu = table.mu;
    eff.beta_M = beta_M;
    eff.beta_S = beta_S;
    const bool thermal = !std::isinf(beta_M) || !std::isinf(beta_S);
    if (thermal) {
        for (auto it = table.points.rbegin(); it != table.points.rend(); ++it) {
            double nm = thermal_weight(beta_M, it->omega);
            double ns = thermal_weight(beta_S, it->omega);
            eff.omega.push_back(-it->omega);
            eff.J.push_back(nm * it->JM.conjugate() + ns * it->JS.conjugate());
        }
        eff.n_negative = eff.omega.size();
    }
    for (const auto& p : table.points) {
        double nm = thermal_weight(beta_M, p.omega);
        double ns = thermal_weight(beta_S, p.omega);
        eff.omega.push_back(p.omega);
        eff.J.push_back((1.0 + nm) * p.JM + (1.0 + ns) * p.JS);
    }
    return eff;
}

CMat EffectiveSpectral::at(double w) const {
    const auto n = static_cast<Eigen::Index>(mu.size());
    std::size_t lo = w < 0.0 ? 0 : n_negative;
    std::size_t hi = w < 0.0 ? n_negative : omega.size();
    if (hi == lo || w < omega[lo] || w > omega[hi - 1]) return CMat::Zero(n, n);
    auto it = std::upper_bound(omega.begin() + lo, omega.begin() + hi, w);
    std::size_t r = static_cast<std::size_t>(it - omega.begin());
    if (r >= hi) return J[hi - 1];
    std::size_t l = r - 1;
    double t = (w - omega[l]) / (omega[r] - omega[l]);
    return (1.0 - t) * J[l] + t * J[r];
}

CMat coupling_sqrt(const CMat& J, const std::vector<double>& mu) {
    const auto n = J.rows();
    if (J.cols() != n || static_cast<std::size_t>(n) != mu.size())
        throw ConfigError("coupling_sqrt: size mismatch");
    RVec pinv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(mu[i] > 0.0)) throw ConfigError("coupling_sqrt: dipole magnitudes must be positive");
        pinv[i] = 1.0 / mu[i];
    }
    CMat A = pinv.asDiagonal() * hermitian_part(J) * pinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<CMat> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("coupling_sqrt: eigen decomposition failed");
    RVec lam = es.eigenvalues();
    double scale = lam.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (lam[i] < -1e-10 * scale)
            throw NumericalError("coupling_sqrt: eigenvalue " + std::to_string(lam[i]) +
                                 " below clip threshold (norm " + std::to_string(scale) + ")");
        lam[i] = std::sqrt(std::max(lam[i], 0.0));
    }
    const CMat& V = es.eigenvectors();
    CMat root = V * lam.asDiagonal() * V.adjoint();
    RVec p(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] = mu[i];
    return p.asDiagonal() * root;
}

std::vector<CMat> correlator(const EffectiveSpectral& eff, const std::vector<double>& times) {
    const auto n = static_cast<Eigen::Index>(eff.mu.size());
    std::vector<CMat> out(times.size(), CMat::Zero(n, n));
    const std::size_t branches[3] = {0, eff.n_negative, eff.omega.size()};
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double t = times[ti];
        CMat acc = CMat::Zero(n, n);
        for (int b = 0; b < 2; ++b) {
            for (std::size_t l = branches[b]; l + 1 < branches[b + 1]; ++l) {
                double a = eff.omega[l];
                double h = eff.omega[l + 1] - a;
                cplx p1, p2;
                phi12(cplx(0.0, -t * h), p1, p2);
                cplx ph = std::exp(cplx(0.0, -t * a)) * h;
                acc += (ph * (p1 - p2)) * eff.J[l] + (ph * p2) * eff.J[l + 1];
            }
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) acc(i, j) /= eff.mu[i] * eff.mu[j];
        out[ti] = acc;
    }
    return out;
}

double sum_rule_residual(const SpectralPoint& p) {
    CMat g = p.Gamma.cast<cplx>() / (2.0 * kPi);
    double n = g.norm();
    return n > 0.0 ? (p.JM + p.JS - g).norm() / n : 0.0;
}

double imag_balance_residual(const SpectralPoint& p) {
    double n = p.Gamma.norm() / (2.0 * kPi);
    return n > 0.0 ? (p.JM.imag() + p.JS.imag()).norm() / n : 0.0;
}

double min_eigen_ratio(const CMat& A) {
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(A), Eigen::EigenvaluesOnly);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    return scale > 0.0 ? es.eigenvalues().minCoeff() / scale : 0.0;
}

double resolvable_horizon(const EffectiveSpectral& eff) {
    double dmax = 0.0;
    for (std::size_t l = 0; l + 1 < eff.omega.size(); ++l) {
        if (l + 1 == eff.n_negative) continue;  // gap between the branches
        dmax = std::max(dmax, eff.omega[l + 1] - eff.omega[l]);
    }
    return dmax > 0.0 ? kPi / dmax : 0.0;
}

}  // namespace qbem
