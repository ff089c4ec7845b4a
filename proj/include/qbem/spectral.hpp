// spectral.hpp — spectral densities, thermal dressing and bath correlators
#pragma once

#include <limits>
#include <vector>

#include "qbem/emcore.hpp"

namespace qbem {

struct PowerMatrices;

struct SpectralPoint {
    double omega = 0.0;
    CMat JM;     // medium-assisted part (Hermitian)
    CMat JS;     // radiative part (Hermitian)
    RMat Gamma;  // total rate matrix (symmetric)
    // relative anti-Hermitian part removed by the projection
    double asym_M = 0.0, asym_S = 0.0, asym_G = 0.0;
};

// J_M = 2 P_abs/(pi w), J_S = 2 P_rad/(pi w), Gamma = 4 P_em/w, projected onto
// Hermitian (Gamma: real symmetric) matrices.
SpectralPoint spectral_from_powers(const PowerMatrices& pm);

// Spectral densities on a positive frequency grid for a fixed emitter set.
struct SpectralTable {
    std::vector<double> mu;           // dipole magnitudes used in the solve
    std::vector<SpectralPoint> points;  // strictly increasing omega
    double omega_p = 1.0;

    std::size_t n_emitters() const { return mu.size(); }
    // J_0 = mu_1^2 omega_p^3 / (6 pi^2)
    double j0() const;
    // Same geometry with new dipole magnitudes (J scales with mu_i mu_j).
    SpectralTable rescaled(const std::vector<double>& new_mu) const;
    void check() const;
};

inline constexpr double kInfBeta = std::numeric_limits<double>::infinity();

// Bose-Einstein occupation 1/(exp(beta w) - 1); zero for beta = inf.
double thermal_weight(double beta, double omega);

// Temperature-dressed spectral density on the full frequency line. Branch 0 holds the
// positive grid, branch 1 the mirrored negative grid (stored in increasing order).
struct EffectiveSpectral {
    std::vector<double> omega;  // increasing over the whole line
    std::vector<CMat> J;
    std::vector<double> mu;
    double beta_M = kInfBeta, beta_S = kInfBeta;
    std::size_t n_negative = 0;  // number of leading entries with omega < 0

    std::size_t n_emitters() const { return mu.size(); }
    // Piecewise-linear interpolation inside each branch, zero outside the support.
    CMat at(double w) const;
    bool has_negative_branch() const { return n_negative > 0; }
};

EffectiveSpectral dress(const SpectralTable& table, double beta_M, double beta_S);

// K with K K^dagger = J built as P (P^-1 J P^-1)^{1/2}, P = diag(mu).
// Eigenvalues below -1e-10 ||J|| raise NumericalError; smaller ones are clipped.
CMat coupling_sqrt(const CMat& J, const std::vector<double>& mu);

// C_ij(t) = (1/(mu_i mu_j)) int J_eff,ij(w) exp(-i w t) dw over the stored support,
// integrating the piecewise-linear interpolant exactly.
std::vector<CMat> correlator(const EffectiveSpectral& eff, const std::vector<double>& times);

// ||J_M + J_S - Gamma/2pi|| / ||Gamma/2pi|| (Frobenius norms).
double sum_rule_residual(const SpectralPoint& p);
// ||Im J_M + Im J_S|| / ||Gamma/2pi||
double imag_balance_residual(const SpectralPoint& p);
// Smallest eigenvalue of the Hermitian part divided by the largest magnitude (0 for a zero matrix).
double min_eigen_ratio(const CMat& A);

// Largest t resolvable on the stored grid, pi / max spacing.
double resolvable_horizon(const EffectiveSpectral& eff);

}  // namespace qbem
