#include "qbem/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "qbem/errors.hpp"

namespace qbem {

double SurrogateBath::horizon() const { return d_omega > 0.0 ? kPi / d_omega : 0.0; }

SurrogateBath discretize_bath(const EffectiveSpectral& eff, int n_freq) {
    if (eff.omega.size() <= eff.n_negative) throw ConfigError("bath: empty spectral support");
    return discretize_bath(eff, n_freq, eff.omega[eff.n_negative], eff.omega.back());
}

SurrogateBath discretize_bath(const EffectiveSpectral& eff, int n_freq, double w_lo, double w_hi) {
    if (n_freq < 2) throw ConfigError("bath: n_freq must be at least 2");
    if (!(w_hi > w_lo) || !(w_lo > 0.0)) throw ConfigError("bath: empty spectral support");
    SurrogateBath bath;
    bath.n_emitters = eff.n_emitters();
    bath.omega_lo = w_lo;
    bath.omega_hi = w_hi;
    bath.d_omega = (w_hi - w_lo) / n_freq;
    bath.negative_branch = eff.has_negative_branch();
    const double sq = std::sqrt(bath.d_omega);
    auto add_bin = [&](double w) {
        CMat J = eff.at(w);
        if (J.norm() == 0.0) return;
        CMat K = coupling_sqrt(J, eff.mu);
        for (Eigen::Index n = 0; n < K.cols(); ++n) {
            CVec g = K.col(n) * sq;
            if (g.norm() < 1e-14) continue;
            bath.modes.push_back({w, g});
        }
    };
    if (bath.negative_branch)
        for (int k = n_freq - 1; k >= 0; --k) add_bin(-(w_lo + (k + 0.5) * bath.d_omega));
    for (int k = 0; k < n_freq; ++k) add_bin(w_lo + (k + 0.5) * bath.d_omega);
    return bath;
}

std::vector<CMat> mode_correlator(const SurrogateBath& bath, const std::vector<double>& mu,
                                  const std::vector<double>& times) {
    const auto n = static_cast<Eigen::Index>(mu.size());
    std::vector<CMat> out(times.size(), CMat::Zero(n, n));
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        CMat acc = CMat::Zero(n, n);
        for (const auto& m : bath.modes)
            acc += std::exp(cplx(0.0, -m.omega * times[ti])) * (m.g * m.g.adjoint());
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) acc(i, j) /= mu[i] * mu[j];
        out[ti] = acc;
    }
    return out;
}

double correlator_closure(const EffectiveSpectral& eff, const SurrogateBath& bath, const std::vector<double>& times) {
    auto cc = correlator(eff, times);
    auto cm = mode_correlator(bath, eff.mu, times);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        num = std::max(num, (cm[i] - cc[i]).cwiseAbs().maxCoeff());
        den = std::max(den, cc[i].cwiseAbs().maxCoeff());
    }
    return den > 0.0 ? num / den : num;
}

// ---------------------------------------------------------------- Fock space

namespace {

std::uint64_t config_key(const std::array<std::int32_t, 3>& c) {
    std::uint64_t key = 0;
    for (int s = 0; s < 3; ++s) key = (key << 21) | static_cast<std::uint64_t>(c[s] + 1);
    return key;
}

}  // namespace

FockSpace::FockSpace(std::size_t n_modes, int n_max) : n_modes_(n_modes), n_max_(n_max) {
    if (n_max < 0 || n_max > 3) throw ConfigError("fock: n_max must be in [0, 3]");
    if (n_modes >= (1u << 20)) throw ConfigError("fock: too many bath modes");
    const double M = static_cast<double>(n_modes);
    double est = 1.0;
    if (n_max >= 1) est += M;
    if (n_max >= 2) est += M * (M + 1) / 2;
    if (n_max >= 3) est += M * (M + 1) * (M + 2) / 6;
    if (est > 5e7) throw ConfigError("fock: truncated space too large (" + std::to_string(est) + " configurations)");
    configs_.reserve(static_cast<std::size_t>(est));
    const int m = static_cast<int>(n_modes);
    configs_.push_back({-1, -1, -1});
    if (n_max >= 1)
        for (int a = 0; a < m; ++a) configs_.push_back({a, -1, -1});
    if (n_max >= 2)
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) configs_.push_back({a, b, -1});
    if (n_max >= 3)
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b)
                for (int c = b; c < m; ++c) configs_.push_back({a, b, c});
    n_configs_ = configs_.size();

    std::unordered_map<std::uint64_t, std::uint32_t> index;
    index.reserve(n_configs_);
    for (std::size_t i = 0; i < n_configs_; ++i) index.emplace(config_key(configs_[i]), static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < n_configs_; ++i) {
        const auto& c = configs_[i];
        int n = 0;
        while (n < 3 && c[n] >= 0) ++n;
        for (int s = 0; s < n; ++s) {
            if (s > 0 && c[s] == c[s - 1]) continue;
            int mult = 0;
            for (int r = 0; r < n; ++r) mult += c[r] == c[s];
            std::array<std::int32_t, 3> d{-1, -1, -1};
            int w = 0;
            for (int r = 0; r < n; ++r)
                if (r != s) d[w++] = c[r];
            lower_.push_back({static_cast<std::uint32_t>(i), index.at(config_key(d)),
                              static_cast<std::uint32_t>(c[s]), std::sqrt(static_cast<double>(mult))});
        }
    }
}

std::vector<int> FockSpace::modes_of(std::size_t c) const {
    std::vector<int> out;
    for (int s = 0; s < 3; ++s)
        if (configs_[c][s] >= 0) out.push_back(configs_[c][s]);
    return out;
}

// ---------------------------------------------------------------- Hamiltonian

Hamiltonian::Hamiltonian(std::vector<double> Omega, const SurrogateBath& bath, int n_max, bool rwa)
    : Omega_(std::move(Omega)),
      rwa_(rwa),
      fock_(bath.modes.size(), bath.modes.empty() ? 0 : n_max),
      n_em_states_(std::size_t{1} << Omega_.size()) {
    const std::size_t ne = Omega_.size();
    if (ne == 0 || ne > 8) throw ConfigError("hamiltonian: emitter count must be in [1, 8]");
    for (double w : Omega_)
        if (!(w > 0.0)) throw ConfigError("hamiltonian: transition frequencies must be positive");
    if (!bath.modes.empty() && bath.n_emitters != ne) throw ConfigError("hamiltonian: bath/emitter count mismatch");
    if (!bath.modes.empty() && n_max < 1) throw ConfigError("hamiltonian: n_max < 1 with nonzero coupling");
    const std::size_t M = bath.modes.size();
    w_.resize(M);
    g_ = CMat::Zero(static_cast<Eigen::Index>(ne), static_cast<Eigen::Index>(M));
    for (std::size_t m = 0; m < M; ++m) {
        w_[m] = bath.modes[m].omega;
        g_.col(static_cast<Eigen::Index>(m)) = bath.modes[m].g;
    }
    bath_energy_.assign(fock_.dim(), 0.0);
    bath_excitation_.assign(fock_.dim(), 0);
    for (std::size_t c = 0; c < fock_.dim(); ++c)
        for (int m : fock_.modes_of(c)) {
            bath_energy_[c] += w_[m];
            bath_excitation_[c] += w_[m] < 0.0 ? -1 : 1;
        }
}

void Hamiltonian::apply(const CVec& x, CVec& y) const {
    const std::size_t D = fock_.dim();
    const std::size_t ne = Omega_.size();
    const auto& low = fock_.lowering();
    y.resize(static_cast<Eigen::Index>(dim()));
#pragma omp parallel for schedule(static)
    for (std::size_t e = 0; e < n_em_states_; ++e) {
        cplx* ye = y.data() + e * D;
        const cplx* xe = x.data() + e * D;
        double ea = 0.0;
        for (std::size_t i = 0; i < ne; ++i) {
            bool up = (e >> (ne - 1 - i)) & 1u;
            ea += 0.5 * Omega_[i] * (up ? 1.0 : -1.0);
        }
        for (std::size_t c = 0; c < D; ++c) ye[c] = (ea + bath_energy_[c]) * xe[c];
        for (std::size_t i = 0; i < ne; ++i) {
            const std::size_t bit = std::size_t{1} << (ne - 1 - i);
            const bool up = e & bit;
            const cplx* xf = x.data() + (e ^ bit) * D;
            for (const auto& l : low) {
                const cplx g = g_(static_cast<Eigen::Index>(i), l.mode);
                bool lower_term = true, raise_term = true;  // b_m and b_m^dagger parts
                if (rwa_) {
                    bool pos = w_[l.mode] >= 0.0;
                    // positive modes: sigma+ b and sigma- b^dagger; negative modes: the reverse
                    lower_term = pos ? up : !up;
                    raise_term = !lower_term;
                }
                if (lower_term) ye[l.to] -= g * l.s * xf[l.from];
                if (raise_term) ye[l.from] -= std::conj(g) * l.s * xf[l.to];
            }
        }
    }
}

void Hamiltonian::apply_excitation(const CVec& x, CVec& y) const {
    const std::size_t D = fock_.dim();
    y.resize(x.size());
    for (std::size_t e = 0; e < n_em_states_; ++e) {
        int ex = std::popcount(e);
        for (std::size_t c = 0; c < D; ++c) {
            auto idx = static_cast<Eigen::Index>(e * D + c);
            y[idx] = static_cast<double>(ex + bath_excitation_[c]) * x[idx];
        }
    }
}

double Hamiltonian::energy(const CVec& x) const {
    CVec y;
    apply(x, y);
    return x.dot(y).real();
}

CMat Hamiltonian::dense() const {
    const auto n = static_cast<Eigen::Index>(dim());
    if (n > 4096) throw ConfigError("hamiltonian: dense form requested for a large space");
    CMat H(n, n);
    CVec x = CVec::Zero(n), y;
    for (Eigen::Index j = 0; j < n; ++j) {
        x[j] = 1.0;
        apply(x, y);
        H.col(j) = y;
        x[j] = 0.0;
    }
    return H;
}

// ---------------------------------------------------------------- propagation

CVec product_with_vacuum(const Hamiltonian& H, const CVec& emitter_state) {
    if (static_cast<std::size_t>(emitter_state.size()) != H.emitter_states())
        throw ConfigError("initial state: expected " + std::to_string(H.emitter_states()) + " amplitudes");
    double n = emitter_state.norm();
    if (!(n > 0.0)) throw ConfigError("initial state: zero vector");
    CVec psi = CVec::Zero(static_cast<Eigen::Index>(H.dim()));
    const std::size_t D = H.bath_dim();
    for (std::size_t e = 0; e < H.emitter_states(); ++e)
        psi[static_cast<Eigen::Index>(e * D)] = emitter_state[static_cast<Eigen::Index>(e)] / n;
    return psi;
}

CVec named_emitter_state(const std::string& name) {
    CVec v = CVec::Zero(4);
    const double r = 1.0 / std::sqrt(2.0);
    if (name == "bell_plus") {
        v[2] = r;
        v[1] = r;
    } else if (name == "bell_minus") {
        v[2] = r;
        v[1] = -r;
    } else if (name == "eg") {
        v[2] = 1.0;
    } else if (name == "ge") {
        v[1] = 1.0;
    } else if (name == "gg") {
        v[0] = 1.0;
    } else if (name == "ee") {
        v[3] = 1.0;
    } else {
        throw ConfigError("initial state: unknown name '" + name + "'");
    }
    return v;
}

CMat reduce(const Hamiltonian& H, const CVec& psi) {
    const auto ns = static_cast<Eigen::Index>(H.emitter_states());
    const auto D = static_cast<Eigen::Index>(H.bath_dim());
    CMat rho(ns, ns);
    for (Eigen::Index a = 0; a < ns; ++a)
        for (Eigen::Index b = a; b < ns; ++b) {
            cplx s = psi.segment(a * D, D).transpose() * psi.segment(b * D, D).conjugate();
            rho(a, b) = s;
            rho(b, a) = std::conj(s);
        }
    return rho;
}

std::vector<double> excited_populations(const CMat& rho) {
    const auto ns = rho.rows();
    int ne = 0;
    while ((Eigen::Index{1} << ne) < ns) ++ne;
    std::vector<double> p(ne, 0.0);
    for (Eigen::Index e = 0; e < ns; ++e)
        for (int i = 0; i < ne; ++i)
            if ((e >> (ne - 1 - i)) & 1) p[i] += rho(e, e).real();
    return p;
}

double negativity(const CMat& rho) {
    if (rho.rows() != 4 || rho.cols() != 4) throw ConfigError("negativity: expected a 4x4 density matrix");
    cplx tr = rho.trace();
    if (std::abs(tr - 1.0) > 1e-8) throw NumericalError("negativity: trace deviates from one");
    CMat pt(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) pt(2 * a + b, 2 * c + d) = rho(2 * c + b, 2 * a + d);
    CMat h = 0.5 * (pt + pt.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
    double n = 0.0;
    for (int i = 0; i < 4; ++i)
        if (es.eigenvalues()[i] < 0.0) n -= es.eigenvalues()[i];
    return n < 1e-12 ? 0.0 : n;
}

namespace {

struct Krylov {
    std::vector<CVec> V;
    std::vector<double> alpha, beta;  // beta[j] couples V[j] and V[j+1]
    bool invariant = false;
};

Krylov lanczos(const Hamiltonian& H, const CVec& v0, int m) {
    Krylov kr;
    kr.V.push_back(v0);
    CVec w;
    for (int j = 0; j < m; ++j) {
        H.apply(kr.V[j], w);
        double a = kr.V[j].dot(w).real();
        kr.alpha.push_back(a);
        w -= a * kr.V[j];
        if (j > 0) w -= kr.beta[j - 1] * kr.V[j - 1];
        for (int pass = 0; pass < 1; ++pass)
            for (int i = 0; i <= j; ++i) w -= kr.V[i].dot(w) * kr.V[i];
        double b = w.norm();
        kr.beta.push_back(b);
        if (b < 1e-14 * std::max(1.0, std::abs(a))) {
            kr.invariant = true;
            break;
        }
        if (j + 1 < m) kr.V.push_back(w / b);
    }
    return kr;
}

// exp(-i T dt) e_1 in the Krylov basis and the a posteriori error estimate.
void krylov_exp(const Krylov& kr, double dt, CVec& c, double& err) {
    const int n = static_cast<int>(kr.alpha.size());
    RMat T = RMat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        T(j, j) = kr.alpha[j];
        if (j + 1 < n) T(j, j + 1) = T(j + 1, j) = kr.beta[j];
    }
    Eigen::SelfAdjointEigenSolver<RMat> es(T);
    const RMat& Q = es.eigenvectors();
    CVec ph(n);
    for (int j = 0; j < n; ++j) ph[j] = std::exp(cplx(0.0, -es.eigenvalues()[j] * dt)) * Q(0, j);
    c = Q.cast<cplx>() * ph;
    err = kr.invariant ? 0.0 : kr.beta[n - 1] * std::abs(c[n - 1]) * dt;
}

}  // namespace

Trajectory propagate(const Hamiltonian& H, const CVec& psi0, const std::vector<double>& times,
                     const PropagationOptions& opts) {
    if (static_cast<std::size_t>(psi0.size()) != H.dim()) throw ConfigError("propagate: state size mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw ConfigError("propagate: initial state not normalised");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw ConfigError("propagate: time grid must be increasing");
    Trajectory tr;
    // excitation sectors present initially
    std::vector<int> sector_of;
    std::vector<char> allowed;
    int smin = 0;
    if (H.rwa()) {
        CVec one = CVec::Ones(psi0.size()), ex;
        H.apply_excitation(one, ex);
        sector_of.resize(H.dim());
        int smax = 0;
        for (std::size_t i = 0; i < H.dim(); ++i) {
            sector_of[i] = static_cast<int>(std::lround(ex[static_cast<Eigen::Index>(i)].real()));
            smin = std::min(smin, sector_of[i]);
            smax = std::max(smax, sector_of[i]);
        }
        allowed.assign(smax - smin + 1, 0);
        for (std::size_t i = 0; i < H.dim(); ++i)
            if (std::norm(psi0[static_cast<Eigen::Index>(i)]) > 0.0) allowed[sector_of[i] - smin] = 1;
    }
    auto record = [&](double t, const CVec& psi) {
        CMat rho = reduce(H, psi);
        tr.t.push_back(t);
        tr.p_e.push_back(excited_populations(rho));
        tr.negativity.push_back(H.n_emitters() == 2 ? negativity(rho / rho.trace().real()) : 0.0);
        tr.norm_drift.push_back(std::abs(psi.norm() - 1.0));
        tr.energy.push_back(H.energy(psi));
        double leak = 0.0;
        if (H.rwa())
            for (std::size_t i = 0; i < H.dim(); ++i)
                if (!allowed[sector_of[i] - smin]) leak += std::norm(psi[static_cast<Eigen::Index>(i)]);
        tr.sector_leak.push_back(leak);
        tr.rho.push_back(std::move(rho));
    };
    CVec psi = psi0;
    double t = 0.0;
    for (double target : times) {
        if (target < t) throw ConfigError("propagate: output times must be non-negative");
        while (target - t > 1e-13 * std::max(1.0, target)) {
            double nrm = psi.norm();
            Krylov kr = lanczos(H, psi / nrm, opts.krylov_dim);
            double dt = target - t;
            CVec c;
            double err = 0.0;
            for (int tries = 0;; ++tries) {
                krylov_exp(kr, dt, c, err);
                if (err <= opts.tol) break;
                if (tries > 60)
                    throw NumericalError("propagate: Krylov step did not converge at t = " + std::to_string(t) +
                                         " (residual " + std::to_string(err) + ")");
                dt *= 0.5;
            }
            CVec next = CVec::Zero(psi.size());
            for (Eigen::Index j = 0; j < c.size(); ++j) next += c[j] * kr.V[static_cast<std::size_t>(j)];
            psi = nrm * next;
            t += dt;
            ++tr.substeps;
        }
        t = target;
        record(t, psi);
    }
    tr.final_state = psi;
    return tr;
}

}  // namespace qbem
