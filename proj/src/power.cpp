#include "qbem/power.hpp"

#include <cmath>

#include "qbem/errors.hpp"

namespace qbem {

namespace {

inline Vec3 point_on(const TriGeom& tri, const Eigen::Vector3d& b) {
    return b[0] * tri.v[0] + b[1] * tri.v[1] + b[2] * tri.v[2];
}

// Per-triangle current coefficients: sum_b x_b c_b and sum_b x_b c_b v_b, so that the
// current on the triangle is a0 * r - a1 and its surface divergence 2 a0.
struct TriCurrent {
    cplx a0 = 0.0;
    CVec3 a1 = CVec3::Zero();
};

std::vector<TriCurrent> tri_currents(const RwgBasis& basis, const CMat& X, Eigen::Index col, Eigen::Index off) {
    std::vector<TriCurrent> out(basis.halves.size());
    for (std::size_t t = 0; t < basis.halves.size(); ++t) {
        for (const auto& h : basis.halves[t]) {
            cplx x = X(off + h.fn, col) * h.coef;
            out[t].a0 += x;
            out[t].a1 += x * h.vertex.cast<cplx>();
        }
    }
    return out;
}

}  // namespace

FieldEvaluator::FieldEvaluator(const OperatorAssembler& op, int order)
    : op_(op), rule_(quad::conical(order > 0 ? order : op.options().field_order)) {}

std::vector<FieldPair> FieldEvaluator::scattered(double omega, const CMat& X, const Vec3& r) const {
    const auto& basis = op_.basis();
    const auto& geom = op_.geometry();
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index nc = X.cols();
    const Medium ext = vacuum(omega);
    const cplx k = ext.k, ik = kI * k, i_over_k = kI / k;
    std::vector<CVec3> LJ(nc, CVec3::Zero()), KJ(nc, CVec3::Zero()), LM(nc, CVec3::Zero()),
        KM(nc, CVec3::Zero());
    const double nf = op_.options().near_factor;
    for (std::size_t t = 0; t < geom.size(); ++t) {
        const TriGeom& T = geom[t];
        bool near = (r - T.centroid).norm() < nf * T.diam;
        Moments m = near ? moments_singular(T, quad::seven_point(), k, r) : moments_regular(T, rule_, k, r);
        for (Eigen::Index c = 0; c < nc; ++c) {
            for (int part = 0; part < 2; ++part) {
                cplx a0 = 0.0;
                CVec3 a1 = CVec3::Zero();
                for (const auto& h : basis.halves[t]) {
                    cplx x = X(part * n + h.fn, c) * h.coef;
                    a0 += x;
                    a1 += x * h.vertex.cast<cplx>();
                }
                CVec3 L = ik * (a0 * m.i1 - a1 * m.i0) + i_over_k * 2.0 * a0 * m.g1;
                CVec3 Kc = a0 * m.g2 - cross(m.g1, a1);
                if (part == 0) {
                    LJ[c] += L;
                    KJ[c] += Kc;
                } else {
                    LM[c] += L;
                    KM[c] += Kc;
                }
            }
        }
    }
    std::vector<FieldPair> out(nc);
    for (Eigen::Index c = 0; c < nc; ++c) {
        out[c].E = ext.zeta * LJ[c] - KM[c];
        out[c].H = LM[c] / ext.zeta + KJ[c];
    }
    return out;
}

EnclosingSphere enclosing_sphere(const TriangleMesh& mesh, const std::vector<DipoleSource>& emitters) {
    EnclosingSphere s;
    Vec3 lo = mesh.vertices.front(), hi = lo;
    for (const auto& v : mesh.vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    s.center = 0.5 * (lo + hi);
    double rb = 0.0;
    for (const auto& v : mesh.vertices) rb = std::max(rb, (v - s.center).norm());
    double re = 1e300;
    for (const auto& e : emitters) re = std::min(re, (e.position - s.center).norm());
    if (re > 1.02 * rb) {
        s.radius = 0.5 * (rb + re);
        s.valid = true;
    }
    return s;
}

CMat absorbed_power_sphere(const OperatorAssembler& op, const FieldEvaluator& fe, double omega,
                           const std::vector<DipoleSource>& emitters, const CMat& X,
                           const EnclosingSphere& s, int n_theta) {
    const auto rule = quad::sphere_product(n_theta);
    const Eigen::Index ne = static_cast<Eigen::Index>(emitters.size());
    const Medium ext = vacuum(omega);
    std::vector<CMat> contrib(rule.size());
    (void)op;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 r = s.center + s.radius * rule.dir[q];
        auto sc = fe.scattered(omega, X, r);
        std::vector<FieldPair> inc(ne);
        for (Eigen::Index e = 0; e < ne; ++e)
            inc[e] = electric_dipole_fields(ext, emitters[e].position, emitters[e].moment(), r);
        CMat S(ne, ne);
        CVec3 nq = rule.dir[q].cast<cplx>();
        for (Eigen::Index i = 0; i < ne; ++i)
            for (Eigen::Index j = 0; j < ne; ++j) {
                CVec3 Ei = inc[i].E + sc[i].E, Hi = inc[i].H + sc[i].H;
                CVec3 Ej = inc[j].E + sc[j].E, Hj = inc[j].H + sc[j].H;
                // incident-incident flux through a source-free closed surface vanishes identically
                CVec3 v = cross(Ei, Hj.conjugate()) + cross(Ej.conjugate(), Hi) -
                          cross(inc[i].E, inc[j].H.conjugate()) - cross(inc[j].E.conjugate(), inc[i].H);
                S(i, j) = 0.25 * (nq.transpose() * v)(0);
            }
        contrib[q] = -rule.w[q] * s.radius * s.radius * S;
    }
    CMat P = CMat::Zero(ne, ne);
    for (const auto& c : contrib) P += c;
    return P;
}

CMat absorbed_power_surface(const OperatorAssembler& op, const CMat& X) {
    const auto& basis = op.basis();
    const auto& geom = op.geometry();
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    const auto& rule = quad::seven_point();
    RMat G = RMat::Zero(n, n);
    for (std::size_t t = 0; t < geom.size(); ++t) {
        const TriGeom& T = geom[t];
        for (std::size_t q = 0; q < rule.size(); ++q) {
            Vec3 r = point_on(T, rule.bary[q]);
            double W = rule.w[q] * T.area;
            for (const auto& ha : basis.halves[t])
                for (const auto& hb : basis.halves[t]) {
                    Vec3 fa = ha.coef * (r - ha.vertex), fb = hb.coef * (r - hb.vertex);
                    G(ha.fn, hb.fn) += W * fa.dot(T.n.cross(fb));
                }
        }
    }
    CMat A = X.topRows(n), B = X.bottomRows(n);
    CMat Gc = G.cast<cplx>();
    return -0.25 * (B.transpose() * Gc * A.conjugate() + (B.adjoint() * Gc * A).transpose());
}

CMat radiated_power_analytic(const RwgBasis& basis, double omega, const std::vector<DipoleSource>& emitters,
                             const CMat& X) {
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    const int ne = static_cast<int>(emitters.size());
    const int ns = static_cast<int>(n) + ne;
    const double k = omega;
    std::vector<Vec3> pos(ns);
    // moments[src][col]
    std::vector<std::vector<CVec3>> P(ns, std::vector<CVec3>(ne, CVec3::Zero()));
    std::vector<std::vector<CVec3>> M(ns, std::vector<CVec3>(ne, CVec3::Zero()));
    for (Eigen::Index s = 0; s < n; ++s) {
        const auto& f = basis.fns[s];
        pos[s] = f.center();
        CVec3 arm = (f.length * f.dipole_arm()).cast<cplx>() / (kI * omega);
        for (int c = 0; c < ne; ++c) {
            P[s][c] = X(s, c) * arm;
            M[s][c] = X(n + s, c) * arm;
        }
    }
    for (int e = 0; e < ne; ++e) {
        pos[n + e] = emitters[e].position;
        P[n + e][e] = emitters[e].moment();
    }
    const double k4 = k * k * k * k;
    const double pre = k4 / (8.0 * kPi);
    std::vector<CMat> partial(ns, CMat::Zero(ne, ne));
#pragma omp parallel for schedule(dynamic, 16)
    for (int s = 0; s < ns; ++s) {
        CMat acc = CMat::Zero(ne, ne);
        for (int t = 0; t < ns; ++t) {
            Vec3 R = pos[s] - pos[t];
            double r = R.norm();
            Fgh q = r > 0.0 ? fgh(k * r) : Fgh{2.0 / 3.0, 0.0, 0.0};
            Vec3 nh = r > 0.0 ? Vec3(R / r) : Vec3::Zero();
            for (int i = 0; i < ne; ++i) {
                const CVec3& ps = P[s][i];
                const CVec3& ms = M[s][i];
                cplx psn = nh[0] * ps[0] + nh[1] * ps[1] + nh[2] * ps[2];
                cplx msn = nh[0] * ms[0] + nh[1] * ms[1] + nh[2] * ms[2];
                for (int j = 0; j < ne; ++j) {
                    CVec3 pt = P[t][j].conjugate(), mt = M[t][j].conjugate();
                    cplx ptn = nh[0] * pt[0] + nh[1] * pt[1] + nh[2] * pt[2];
                    cplx mtn = nh[0] * mt[0] + nh[1] * mt[1] + nh[2] * mt[2];
                    cplx ee = q.f * (ps[0] * pt[0] + ps[1] * pt[1] + ps[2] * pt[2]) - q.g * psn * ptn;
                    cplx mm = q.f * (ms[0] * mt[0] + ms[1] * mt[1] + ms[2] * mt[2]) - q.g * msn * mtn;
                    cplx em = 0.0;
                    if (q.h != 0.0) {
                        CVec3 a = cross(ps, mt), b = cross(ms, pt);
                        cplx an = nh[0] * a[0] + nh[1] * a[1] + nh[2] * a[2];
                        cplx bn = nh[0] * b[0] + nh[1] * b[1] + nh[2] * b[2];
                        em = kI * q.h * (bn - an);
                    }
                    acc(i, j) += ee + mm + em;
                }
            }
        }
        partial[s] = acc;
    }
    CMat out = CMat::Zero(ne, ne);
    for (const auto& p : partial) out += p;
    return pre * out;
}

std::vector<std::vector<CVec3>> far_field(const OperatorAssembler& op, double omega,
                                          const std::vector<DipoleSource>& emitters, const CMat& X,
                                          const std::vector<Vec3>& dirs) {
    const auto& basis = op.basis();
    const auto& geom = op.geometry();
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    const int ne = static_cast<int>(emitters.size());
    const double k = omega;
    const auto rule = quad::conical(op.options().field_order);
    // current samples: position, weight, J and M per column
    std::vector<Vec3> pts;
    std::vector<double> wts;
    std::vector<std::vector<CVec3>> Js, Ms;
    std::vector<std::vector<TriCurrent>> tj(ne), tm(ne);
    for (int c = 0; c < ne; ++c) {
        tj[c] = tri_currents(basis, X, c, 0);
        tm[c] = tri_currents(basis, X, c, n);
    }
    for (std::size_t t = 0; t < geom.size(); ++t) {
        for (std::size_t q = 0; q < rule.size(); ++q) {
            Vec3 r = point_on(geom[t], rule.bary[q]);
            pts.push_back(r);
            wts.push_back(rule.w[q] * geom[t].area);
            std::vector<CVec3> jv(ne), mv(ne);
            for (int c = 0; c < ne; ++c) {
                jv[c] = tj[c][t].a0 * r.cast<cplx>() - tj[c][t].a1;
                mv[c] = tm[c][t].a0 * r.cast<cplx>() - tm[c][t].a1;
            }
            Js.push_back(std::move(jv));
            Ms.push_back(std::move(mv));
        }
    }
    std::vector<std::vector<CVec3>> A(dirs.size(), std::vector<CVec3>(ne));
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t d = 0; d < dirs.size(); ++d) {
        const Vec3& nh = dirs[d];
        std::vector<CVec3> Jh(ne, CVec3::Zero()), Mh(ne, CVec3::Zero());
        for (std::size_t q = 0; q < pts.size(); ++q) {
            cplx ph = std::exp(-kI * (k * nh.dot(pts[q]))) * wts[q];
            for (int c = 0; c < ne; ++c) {
                Jh[c] += ph * Js[q][c];
                Mh[c] += ph * Ms[q][c];
            }
        }
        CVec3 nc = nh.cast<cplx>();
        for (int c = 0; c < ne; ++c) {
            CVec3 Jt = Jh[c] - nc * (nc.transpose() * Jh[c])(0);
            CVec3 a = (kI * k / (4.0 * kPi)) * (Jt - cross(nc, Mh[c]));
            CVec3 p = emitters[c].moment();
            CVec3 pt = p - nc * (nc.transpose() * p)(0);
            a += (k * k / (4.0 * kPi)) * std::exp(-kI * (k * nh.dot(emitters[c].position))) * pt;
            A[d][c] = a;
        }
    }
    return A;
}

CMat radiated_power_quadrature(const OperatorAssembler& op, double omega,
                               const std::vector<DipoleSource>& emitters, const CMat& X, int n_theta) {
    const auto rule = quad::sphere_product(n_theta);
    auto A = far_field(op, omega, emitters, X, rule.dir);
    const int ne = static_cast<int>(emitters.size());
    CMat P = CMat::Zero(ne, ne);
    for (std::size_t d = 0; d < rule.size(); ++d)
        for (int i = 0; i < ne; ++i)
            for (int j = 0; j < ne; ++j) P(i, j) += 0.5 * rule.w[d] * (A[d][i].transpose() * A[d][j].conjugate())(0);
    return P;
}

RMat emitted_power(const FieldEvaluator& fe, double omega, const std::vector<DipoleSource>& emitters,
                   const CMat& X) {
    const int ne = static_cast<int>(emitters.size());
    const Medium ext = vacuum(omega);
    const double k = omega;
    RMat P(ne, ne);
    for (int i = 0; i < ne; ++i) {
        auto sc = fe.scattered(omega, X, emitters[i].position);
        CVec3 u = emitters[i].orientation.cast<cplx>();
        for (int j = 0; j < ne; ++j) {
            cplx ue = (u.transpose() * sc[j].E)(0);
            double im = ue.imag();
            if (i == j) {
                im += k * k * k * emitters[i].mu / (6.0 * kPi);
            } else {
                FieldPair inc = electric_dipole_fields(ext, emitters[j].position, emitters[j].moment(),
                                                       emitters[i].position);
                im += (u.transpose() * inc.E)(0).imag();
            }
            P(i, j) = 0.5 * omega * emitters[i].mu * im;
        }
    }
    return P;
}

PowerMatrices compute_powers(const OperatorAssembler& op, double omega, const DrudeMaterial& mat,
                             const std::vector<DipoleSource>& emitters, const PowerOptions& popts) {
    PowerMatrices pm;
    pm.omega = omega;
    const int ne = static_cast<int>(emitters.size());
    if (op.basis().size() == 0) {
        // no bodies: everything emitted is radiated
        CMat X = CMat::Zero(0, ne);
        FieldEvaluator fe(op);
        pm.P_abs = CMat::Zero(ne, ne);
        pm.P_rad = radiated_power_analytic(op.basis(), omega, emitters, X);
        pm.P_em = emitted_power(fe, omega, emitters, X);
        pm.rcond = 1.0;
        if (popts.prad_quadrature_order > 0)
            pm.P_rad_quad = radiated_power_quadrature(op, omega, emitters, X, popts.prad_quadrature_order);
        return pm;
    }
    CMat Z = op.assemble_pmchwt(omega, mat);
    CMat V = op.dipole_rhs(omega, emitters);
    SolveResult sol = factor_and_solve(std::move(Z), V, op.options().cond_limit);
    pm.rcond = sol.rcond;
    FieldEvaluator fe(op);
    EnclosingSphere s = enclosing_sphere(op.mesh(), emitters);
    pm.P_em = emitted_power(fe, omega, emitters, sol.X);
    if (s.valid && !popts.force_surface) {
        FieldEvaluator fs(op, popts.sphere_field_order);
        // a nearly lossless body has P_abs far below P_em; judge convergence against the emitted scale
        const double floor = std::max(1e-2 * pm.P_em.norm(), 1e-300);
        pm.sphere_radius = s.radius;
        int order = popts.sphere_order_start;
        CMat prev = absorbed_power_sphere(op, fs, omega, emitters, sol.X, s, order);
        double change = 1.0;
        while (order + popts.sphere_order_step <= popts.sphere_order_max) {
            order += popts.sphere_order_step;
            CMat cur = absorbed_power_sphere(op, fs, omega, emitters, sol.X, s, order);
            change = (cur - prev).norm() / std::max(cur.norm(), floor);
            prev = cur;
            if (change < popts.sphere_tol) break;
        }
        pm.P_abs = prev;
        pm.sphere_order = order;
        pm.flux_change = change;
    } else {
        pm.P_abs = absorbed_power_surface(op, sol.X);
    }
    pm.P_rad = radiated_power_analytic(op.basis(), omega, emitters, sol.X);
    if (popts.prad_quadrature_order > 0)
        pm.P_rad_quad = radiated_power_quadrature(op, omega, emitters, sol.X, popts.prad_quadrature_order);
    if (!pm.P_abs.allFinite() || !pm.P_rad.allFinite() || !pm.P_em.allFinite())
        throw NumericalError("compute_powers: non-finite power at omega = " + std::to_string(omega));
    return pm;
}

}  // namespace qbem
