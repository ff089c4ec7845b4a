#include "qbem/potentials.hpp"

#include <cmath>

namespace qbem {

std::vector<TriGeom> triangle_geometry(const TriangleMesh& mesh) {
    std::vector<TriGeom> out(mesh.n_triangles());
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
        TriGeom& g = out[t];
        int ti = static_cast<int>(t);
        for (int k = 0; k < 3; ++k) g.v[k] = mesh.corner(ti, k);
        g.n = mesh.normal(ti);
        g.area = mesh.area(ti);
        g.centroid = mesh.centroid(ti);
        g.diam = mesh.diameter(ti);
        for (int k = 0; k < 3; ++k) {
            g.edge_dir[k] = (g.v[(k + 1) % 3] - g.v[k]).normalized();
            g.edge_out[k] = g.edge_dir[k].cross(g.n);
        }
    }
    return out;
}

StaticPotentials static_potentials(const TriGeom& tri, const Vec3& r) {
    StaticPotentials sp;
    const double d = tri.n.dot(r - tri.v[0]);
    const double ad = std::abs(d);
    sp.rho = r - d * tri.n;
    const double tiny = 1e-28 * tri.diam * tri.diam;
    double beta_sum = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Vec3& A = tri.v[i];
        const Vec3& B = tri.v[(i + 1) % 3];
        const Vec3& lh = tri.edge_dir[i];
        const Vec3& uh = tri.edge_out[i];
        double lp = (B - sp.rho).dot(lh), lm = (A - sp.rho).dot(lh);
        double t0 = (A - sp.rho).dot(uh);
        double r0sq = t0 * t0 + d * d;
        double Rp = (r - B).norm(), Rm = (r - A).norm();
        // log((Rp + lp) / (Rm + lm)) with the cancellation-free form for negative l.
        auto rl = [&](double R, double l) { return l >= 0.0 ? R + l : r0sq / (R - l); };
        double logf = 0.0;
        bool singular = false;
        if (r0sq > tiny) {
            logf = std::log(rl(Rp, lp)) - std::log(rl(Rm, lm));
        } else if (lm >= 0.0 || lp <= 0.0) {
            // on the edge line outside the segment
            logf = (lp <= 0.0) ? std::log((Rm - lm) / (Rp - lp)) : std::log((Rp + lp) / (Rm + lm));
        } else {
            singular = true;  // on the edge itself
        }
        double beta = 0.0;
        if (ad > 0.0 && std::abs(t0) > 0.0)
            beta = std::atan(t0 * lp / (r0sq + ad * Rp)) - std::atan(t0 * lm / (r0sq + ad * Rm));
        beta_sum += beta;
        if (!singular) {
            sp.s0 += t0 * logf;
            sp.srho += 0.5 * uh * (r0sq * logf + lp * Rp - lm * Rm);
            sp.grad -= uh * logf;
        } else {
            sp.srho += 0.5 * uh * (lp * Rp - lm * Rm);
        }
    }
    sp.s0 -= ad * beta_sum;
    double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    sp.grad -= tri.n * (sgn * beta_sum);
    return sp;
}

namespace {

inline Vec3 point_on(const TriGeom& tri, const Eigen::Vector3d& b) {
    return b[0] * tri.v[0] + b[1] * tri.v[1] + b[2] * tri.v[2];
}

}  // namespace

Moments moments_regular(const TriGeom& tri, const quad::TriangleRule& rule, cplx k, const Vec3& r) {
    Moments m;
    const double fpi = 1.0 / (4.0 * kPi);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 rq = point_on(tri, rule.bary[q]);
        Vec3 dv = r - rq;
        double R = dv.norm();
        double w = rule.w[q] * tri.area;
        cplx e = std::exp(kI * k * R);
        cplx g = e * (fpi / R);
        cplx gp = (kI * k * R - 1.0) * e * (fpi / (R * R * R));
        m.i0 += w * g;
        m.i1 += (w * g) * rq.cast<cplx>();
        m.g1 += (w * gp) * dv.cast<cplx>();
        m.g2 += (w * gp) * dv.cross(rq).cast<cplx>();
    }
    return m;
}

Moments moments_singular(const TriGeom& tri, const quad::TriangleRule& rule, cplx k, const Vec3& r) {
    Moments m;
    const double fpi = 1.0 / (4.0 * kPi);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        Vec3 rq = point_on(tri, rule.bary[q]);
        Vec3 dv = r - rq;
        double R = dv.norm();
        double w = rule.w[q] * tri.area;
        cplx x = kI * k * R;
        cplx g, gp;
        if (std::abs(x) < 1e-3) {
            g = kI * k * fpi * (1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0);
            gp = R > 0.0 ? (kI * k) * (kI * k) * (fpi / R) * (0.5 + x / 3.0 + x * x / 8.0 + x * x * x / 30.0)
                         : cplx(0.0);
        } else {
            cplx e = std::exp(x);
            g = (e - 1.0) * (fpi / R);
            gp = (x * e - (e - 1.0)) * (fpi / (R * R * R));
        }
        m.i0 += w * g;
        m.i1 += (w * g) * rq.cast<cplx>();
        m.g1 += (w * gp) * dv.cast<cplx>();
        m.g2 += (w * gp) * dv.cross(rq).cast<cplx>();
    }
    StaticPotentials sp = static_potentials(tri, r);
    m.i0 += sp.s0 * fpi;
    m.i1 += ((sp.srho + sp.rho * sp.s0) * fpi).cast<cplx>();
    Vec3 gs = sp.grad * fpi;
    m.g1 += gs.cast<cplx>();
    m.g2 += gs.cross(r).cast<cplx>();
    return m;
}

}  // namespace qbem
