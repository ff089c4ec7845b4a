// dynamics.hpp — surrogate bath, truncated Fock space and Krylov propagation
//
// Emitter basis index e = sum_i b_i 2^(N-1-i) with b_i = 1 for the excited state,
// so for two emitters |gg> = 0, |ge> = 1, |eg> = 2, |ee> = 3. The composite
// amplitude of emitter state e and bath configuration c sits at e * dim_bath + c.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qbem/spectral.hpp"

namespace qbem {

struct BathMode {
    double omega = 0.0;
    CVec g;  // coupling to each emitter
};

struct SurrogateBath {
    std::vector<BathMode> modes;
    double d_omega = 0.0;
    double omega_lo = 0.0, omega_hi = 0.0;  // positive support
    bool negative_branch = false;
    std::size_t n_emitters = 0;

    // pi / d_omega
    double horizon() const;
};

// Midpoint bins of width (w_hi - w_lo)/n_freq on the positive support and, for a
// thermal J_eff, on its mirror. Each bin carries one mode per column of the coupling
// square root; modes with |g| < 1e-14 are dropped.
SurrogateBath discretize_bath(const EffectiveSpectral& eff, int n_freq);
// Same bins restricted to a sub-window of the positive support.
SurrogateBath discretize_bath(const EffectiveSpectral& eff, int n_freq, double w_lo, double w_hi);

// (1/(mu_i mu_j)) sum_m g_im g_jm^* exp(-i w_m t)
std::vector<CMat> mode_correlator(const SurrogateBath& bath, const std::vector<double>& mu,
                                  const std::vector<double>& times);

// max_t ||C_modes(t) - C(t)||_max / max_t ||C(t)||_max over the given times.
double correlator_closure(const EffectiveSpectral& eff, const SurrogateBath& bath, const std::vector<double>& times);

// Bath configurations with at most n_max bosons in total.
class FockSpace {
public:
    FockSpace(std::size_t n_modes, int n_max);

    std::size_t dim() const { return n_configs_; }
    std::size_t n_modes() const { return n_modes_; }
    int n_max() const { return n_max_; }
    // occupied modes of configuration c, ascending, with repetitions
    std::vector<int> modes_of(std::size_t c) const;

    // b_m |from> = s |to>
    struct Lowering {
        std::uint32_t from, to, mode;
        double s;
    };
    const std::vector<Lowering>& lowering() const { return lower_; }

private:
    std::size_t n_modes_;
    int n_max_;
    std::size_t n_configs_ = 0;
    std::vector<std::array<std::int32_t, 3>> configs_;
    std::vector<Lowering> lower_;
};

// H = sum_i (Omega_i/2) sigma_z^i + sum_m w_m n_m - sum_i sigma_x^i sum_m (g_im b_m + h.c.),
// or the rotating-wave form that keeps only the excitation-conserving terms
// (for w_m < 0 the roles of b_m and b_m^dagger swap).
class Hamiltonian {
public:
    Hamiltonian(std::vector<double> Omega, const SurrogateBath& bath, int n_max, bool rwa);

    std::size_t dim() const { return n_em_states_ * fock_.dim(); }
    std::size_t n_emitters() const { return Omega_.size(); }
    std::size_t emitter_states() const { return n_em_states_; }
    std::size_t bath_dim() const { return fock_.dim(); }
    bool rwa() const { return rwa_; }
    const FockSpace& fock() const { return fock_; }

    void apply(const CVec& x, CVec& y) const;
    // Signed excitation number: excited emitters plus bosons, negative-frequency bosons counted -1.
    void apply_excitation(const CVec& x, CVec& y) const;
    double energy(const CVec& x) const;
    // Dense matrix, for small spaces.
    CMat dense() const;

private:
    std::vector<double> Omega_;
    std::vector<double> w_;
    CMat g_;  // n_emitters x n_modes
    bool rwa_;
    FockSpace fock_;
    std::size_t n_em_states_;
    std::vector<double> bath_energy_;
    std::vector<int> bath_excitation_;
};

struct PropagationOptions {
    int krylov_dim = 30;
    double tol = 1e-12;  // local error bound per substep
};

struct Trajectory {
    std::vector<double> t;
    std::vector<CMat> rho;              // reduced emitter density matrices
    std::vector<std::vector<double>> p_e;  // excited population per emitter
    std::vector<double> negativity;     // two-emitter case, zero otherwise
    std::vector<double> norm_drift;     // | ||psi|| - 1 |
    std::vector<double> energy;
    std::vector<double> sector_leak;    // RWA: weight outside the initial excitation sector
    std::size_t substeps = 0;
    CVec final_state;
};

// Composite state: emitter amplitudes (length 2^N) times bath vacuum.
CVec product_with_vacuum(const Hamiltonian& H, const CVec& emitter_state);
// Named initial emitter state for N = 2: bell_plus, bell_minus, eg, ge, gg, ee.
CVec named_emitter_state(const std::string& name);

// Krylov short-iterative propagation onto the output times (first entry may be 0).
Trajectory propagate(const Hamiltonian& H, const CVec& psi0, const std::vector<double>& times,
                     const PropagationOptions& opts = {});

// Partial trace over the bath.
CMat reduce(const Hamiltonian& H, const CVec& psi);
std::vector<double> excited_populations(const CMat& rho);
// (||rho^T1||_1 - 1)/2 for a two-qubit density matrix, transposing emitter 1.
double negativity(const CMat& rho);

}  // namespace qbem
