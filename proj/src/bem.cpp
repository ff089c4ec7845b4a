#include "qbem/bem.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "qbem/errors.hpp"

namespace qbem {

namespace {

inline Vec3 point_on(const TriGeom& tri, const Eigen::Vector3d& b) {
    return b[0] * tri.v[0] + b[1] * tri.v[1] + b[2] * tri.v[2];
}

inline cplx rdot(const Vec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Greedy colouring so that no two triangles of one colour share an RWG function.
std::vector<std::vector<int>> colour_triangles(const RwgBasis& basis, std::size_t nt) {
    std::vector<std::vector<int>> nbr(nt);
    for (const auto& f : basis.fns) {
        nbr[f.t_plus].push_back(f.t_minus);
        nbr[f.t_minus].push_back(f.t_plus);
    }
    std::vector<int> colour(nt, -1);
    int ncol = 0;
    for (std::size_t t = 0; t < nt; ++t) {
        std::set<int> used;
        for (int u : nbr[t])
            if (colour[u] >= 0) used.insert(colour[u]);
        int c = 0;
        while (used.count(c)) ++c;
        colour[t] = c;
        ncol = std::max(ncol, c + 1);
    }
    std::vector<std::vector<int>> groups(ncol);
    for (std::size_t t = 0; t < nt; ++t) groups[colour[t]].push_back(static_cast<int>(t));
    return groups;
}

// M <- M + M^T in place.
void add_transpose(Eigen::Block<CMat> M) {
    const Eigen::Index n = M.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
        M(j, j) *= 2.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            cplx s = M(i, j) + M(j, i);
            M(i, j) = s;
            M(j, i) = s;
        }
    }
}

}  // namespace

OperatorAssembler::OperatorAssembler(const TriangleMesh& mesh, const RwgBasis& basis, BemOptions opts)
    : mesh_(mesh), basis_(basis), opts_(opts), geom_(triangle_geometry(mesh)) {
    colors_ = colour_triangles(basis_, mesh_.n_triangles());
    const auto& rule = quad::seven_point();
    qpts_.resize(geom_.size());
    for (std::size_t t = 0; t < geom_.size(); ++t)
        for (int o = 0; o < 7; ++o) qpts_[t][o] = point_on(geom_[t], rule.bary[o]);
}

void OperatorAssembler::regular_pair(int p, int q, cplx k_ext, cplx k_int, bool with_int, PairBlocks& be,
                                     PairBlocks& bi) const {
    const TriGeom& P = geom_[p];
    const TriGeom& Q = geom_[q];
    const auto& hp = basis_.halves[p];
    const auto& hq = basis_.halves[q];
    const auto& w = quad::seven_point().w;
    const int nm = with_int ? 2 : 1;
    const cplx ks[2] = {k_ext, k_int};
    PairBlocks* out[2] = {&be, &bi};
    const double fpi = 1.0 / (4.0 * kPi);
    for (int o = 0; o < 7; ++o) {
        const Vec3& r = qpts_[p][o];
        const double W = w[o] * P.area;
        // acc[mi][0..1] = i0, [2..7] = i1, [8..13] = g1, [14..19] = g2 as (re, im) pairs
        double acc[2][20] = {};
        for (int qq = 0; qq < 7; ++qq) {
            const Vec3& rq = qpts_[q][qq];
            const double dx = r[0] - rq[0], dy = r[1] - rq[1], dz = r[2] - rq[2];
            const double R = std::sqrt(dx * dx + dy * dy + dz * dz);
            const double iR = 1.0 / R;
            const double wq = w[qq] * Q.area * fpi;
            const double cx = dy * rq[2] - dz * rq[1], cy = dz * rq[0] - dx * rq[2], cz = dx * rq[1] - dy * rq[0];
            const double vals[10] = {1.0, rq[0], rq[1], rq[2], dx, dy, dz, cx, cy, cz};
            for (int mi = 0; mi < nm; ++mi) {
                const double kr = ks[mi].real(), ki = ks[mi].imag();
                const double damp = ki == 0.0 ? 1.0 : std::exp(-ki * R);
                double sn, cs;
                ::sincos(kr * R, &sn, &cs);
                const double a = damp * wq * iR;
                const double gr = a * cs, gi = a * sn;
                // gp = g (i k R - 1) / R^2
                const double fr = (-ki * R - 1.0) * iR * iR, fi = kr * R * iR * iR;
                const double pr = gr * fr - gi * fi, pi = gr * fi + gi * fr;
                double* A = acc[mi];
                for (int c = 0; c < 4; ++c) {
                    A[2 * c] += gr * vals[c];
                    A[2 * c + 1] += gi * vals[c];
                }
                for (int c = 4; c < 10; ++c) {
                    A[2 * c] += pr * vals[c];
                    A[2 * c + 1] += pi * vals[c];
                }
            }
        }
        cplx i0[2];
        cplx i1[2][3], g1[2][3], g2[2][3];
        for (int mi = 0; mi < nm; ++mi) {
            const double* A = acc[mi];
            i0[mi] = cplx(A[0], A[1]);
            for (int c = 0; c < 3; ++c) {
                i1[mi][c] = cplx(A[2 + 2 * c], A[3 + 2 * c]);
                g1[mi][c] = cplx(A[8 + 2 * c], A[9 + 2 * c]);
                g2[mi][c] = cplx(A[14 + 2 * c], A[15 + 2 * c]);
            }
        }
        for (int mi = 0; mi < nm; ++mi) {
            const cplx k = ks[mi];
            const cplx ik = kI * k, i_over_k = kI / k;
            PairBlocks& B = *out[mi];
            CVec3 I1(i1[mi][0], i1[mi][1], i1[mi][2]);
            CVec3 G1(g1[mi][0], g1[mi][1], g1[mi][2]);
            CVec3 G2(g2[mi][0], g2[mi][1], g2[mi][2]);
            CVec3 F[3], Kv[3];
            for (int b = 0; b < 3; ++b) {
                CVec3 vb = hq[b].vertex.cast<cplx>();
                F[b] = hq[b].coef * (I1 - vb * i0[mi]);
                Kv[b] = hq[b].coef * (G2 - cross(G1, vb));
            }
            for (int a = 0; a < 3; ++a) {
                Vec3 fa = hp[a].coef * (r - hp[a].vertex);
                double Da = 2.0 * hp[a].coef;
                for (int b = 0; b < 3; ++b) {
                    double Db = 2.0 * hq[b].coef;
                    B.T(a, b) += W * (ik * rdot(fa, F[b]) - i_over_k * Da * Db * i0[mi]);
                    B.K(a, b) -= W * rdot(fa, Kv[b]);
                }
            }
        }
    }
}

bool OperatorAssembler::is_near(int p, int q) const {
    const TriGeom &P = geom_[p], &Q = geom_[q];
    return (P.centroid - Q.centroid).norm() < opts_.near_factor * std::max(P.diam, Q.diam);
}

PairBlocks OperatorAssembler::pair_impl(int p, int q, cplx k, const quad::TriangleRule& outer,
                                        const quad::TriangleRule& inner, bool singular) const {
    const TriGeom& P = geom_[p];
    const TriGeom& Q = geom_[q];
    const auto& hp = basis_.halves[p];
    const auto& hq = basis_.halves[q];
    const bool want_k = (p != q);
    PairBlocks B;
    const cplx ik = kI * k, i_over_k = kI / k;
    for (std::size_t o = 0; o < outer.size(); ++o) {
        Vec3 r = point_on(P, outer.bary[o]);
        double W = outer.w[o] * P.area;
        Moments m = singular ? moments_singular(Q, inner, k, r) : moments_regular(Q, inner, k, r);
        CVec3 F[3], Kv[3];
        for (int b = 0; b < 3; ++b) {
            CVec3 vb = hq[b].vertex.cast<cplx>();
            F[b] = hq[b].coef * (m.i1 - vb * m.i0);
            if (want_k) Kv[b] = hq[b].coef * (m.g2 - cross(m.g1, vb));
        }
        for (int a = 0; a < 3; ++a) {
            Vec3 fa = hp[a].coef * (r - hp[a].vertex);
            double Da = 2.0 * hp[a].coef;
            for (int b = 0; b < 3; ++b) {
                double Db = 2.0 * hq[b].coef;
                B.T(a, b) += W * (ik * rdot(fa, F[b]) - i_over_k * Da * Db * m.i0);
                if (want_k) B.K(a, b) -= W * rdot(fa, Kv[b]);
            }
        }
    }
    if (p == q) B.T = 0.5 * (B.T + B.T.transpose()).eval();
    return B;
}

PairBlocks OperatorAssembler::pair(int p, int q, cplx k) const {
    if (is_near(p, q))
        return pair_impl(p, q, k, quad::conical(opts_.near_outer_order), quad::seven_point(), true);
    return pair_impl(p, q, k, quad::seven_point(), quad::seven_point(), false);
}

PairBlocks OperatorAssembler::pair_with_order(int p, int q, cplx k, int outer_order, int inner_order) const {
    return pair_impl(p, q, k, quad::conical(outer_order), quad::conical(inner_order), is_near(p, q));
}

void OperatorAssembler::assemble(cplx k, int body, CMat& T, CMat& K) const {
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.size());
    CMat U = CMat::Zero(n, 2 * n);  // [T^T-part, K^T-part], symmetrised below
    const int nt = static_cast<int>(mesh_.n_triangles());
    for (const auto& group : colors_) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::size_t gi = 0; gi < group.size(); ++gi) {
            int p = group[gi];
            if (body >= 0 && mesh_.body[p] != body) continue;
            for (int q = p; q < nt; ++q) {
                if (body >= 0 && mesh_.body[q] != body) continue;
                PairBlocks B = pair(p, q, k);
                double scale = (q == p) ? 0.5 : 1.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        int m = basis_.halves[p][a].fn, nn = basis_.halves[q][b].fn;
                        // accumulate the transpose: column m stays cache-resident
                        U(nn, m) += scale * B.T(a, b);
                        U(nn, n + m) += scale * B.K(a, b);
                    }
            }
        }
    }
    T = U.leftCols(n);
    K = U.rightCols(n);
    T += U.leftCols(n).transpose();
    K += U.rightCols(n).transpose();
}

CMat OperatorAssembler::assemble_pmchwt(double omega, const DrudeMaterial& mat) const {
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.size());
    const Medium ext = vacuum(omega);
    const Medium in = medium_from_eps(omega, mat.epsilon(omega));
    CMat Z = CMat::Zero(2 * n, 2 * n);
    const int nt = static_cast<int>(mesh_.n_triangles());
    for (const auto& group : colors_) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::size_t gi = 0; gi < group.size(); ++gi) {
            int p = group[gi];
            for (int q = p; q < nt; ++q) {
                PairBlocks Be, Bi;
                bool same = mesh_.body[p] == mesh_.body[q];
                if (same) {
                    const TriGeom &P = geom_[p], &Q = geom_[q];
                    double gap = (P.centroid - Q.centroid).norm() - P.diam - Q.diam;
                    same = in.k.imag() * std::max(0.0, gap) < 36.0;
                }
                if (is_near(p, q)) {
                    Be = pair(p, q, ext.k);
                    if (same) Bi = pair(p, q, in.k);
                } else {
                    regular_pair(p, q, ext.k, in.k, same, Be, Bi);
                }
                double scale = (q == p) ? 0.5 : 1.0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        int m = basis_.halves[p][a].fn, nn = basis_.halves[q][b].fn;
                        cplx t11 = ext.zeta * Be.T(a, b), t22 = Be.T(a, b) / ext.zeta, k12 = Be.K(a, b);
                        if (same) {
                            t11 += in.zeta * Bi.T(a, b);
                            t22 += Bi.T(a, b) / in.zeta;
                            k12 += Bi.K(a, b);
                        }
                        Z(nn, m) += scale * t11;
                        Z(nn, n + m) += scale * k12;
                        Z(n + nn, n + m) += scale * t22;
                    }
            }
        }
    }
    add_transpose(Z.block(0, 0, n, n));
    add_transpose(Z.block(0, n, n, n));
    add_transpose(Z.block(n, n, n, n));
    Z.block(n, 0, n, n) = -Z.block(0, n, n, n);
    return Z;
}

CMat OperatorAssembler::dipole_rhs(double omega, const std::vector<DipoleSource>& emitters) const {
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.size());
    const Medium ext = vacuum(omega);
    const auto rule = quad::conical(opts_.rhs_order);
    CMat V = CMat::Zero(2 * n, static_cast<Eigen::Index>(emitters.size()));
    for (std::size_t t = 0; t < geom_.size(); ++t) {
        const TriGeom& P = geom_[t];
        for (std::size_t o = 0; o < rule.size(); ++o) {
            Vec3 r = point_on(P, rule.bary[o]);
            double W = rule.w[o] * P.area;
            for (std::size_t e = 0; e < emitters.size(); ++e) {
                FieldPair fp = electric_dipole_fields(ext, emitters[e].position, emitters[e].moment(), r);
                for (const auto& h : basis_.halves[t]) {
                    Vec3 fa = h.coef * (r - h.vertex);
                    V(h.fn, e) -= W * rdot(fa, fp.E);
                    V(n + h.fn, e) -= W * rdot(fa, fp.H);
                }
            }
        }
    }
    return V;
}

SolveResult factor_and_solve(CMat Z, const CMat& V, double cond_limit) {
    const lapack_int n = static_cast<lapack_int>(Z.rows());
    if (Z.cols() != n || V.rows() != n) throw std::invalid_argument("factor_and_solve: shape mismatch");
    if (!Z.allFinite() || !V.allFinite()) throw NumericalError("factor_and_solve: non-finite input");
    double anorm = 0.0;
    for (lapack_int j = 0; j < n; ++j) anorm = std::max(anorm, Z.col(j).cwiseAbs().sum());
    std::vector<lapack_int> ipiv(n);
    auto* a = reinterpret_cast<lapack_complex_double*>(Z.data());
    lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, a, n, ipiv.data());
    if (info != 0) throw NumericalError("factor_and_solve: singular matrix (zgetrf info " + std::to_string(info) + ")");
    double rcond = 0.0;
    LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', n, a, n, anorm, &rcond);
    if (!(rcond * cond_limit >= 1.0))
        throw NumericalError("factor_and_solve: condition estimate " + std::to_string(1.0 / rcond) +
                             " exceeds limit");
    SolveResult res;
    res.X = V;
    res.rcond = rcond;
    info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', n, static_cast<lapack_int>(V.cols()), a, n, ipiv.data(),
                          reinterpret_cast<lapack_complex_double*>(res.X.data()), n);
    if (info != 0 || !res.X.allFinite()) throw NumericalError("factor_and_solve: back substitution failed");
    return res;
}

}  // namespace qbem
