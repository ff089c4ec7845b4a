#include "qbem/emcore.hpp"

#include <cmath>
#include <stdexcept>

namespace qbem {

cplx DrudeMaterial::epsilon(double omega) const {
    if (!(omega > 0.0)) throw std::invalid_argument("DrudeMaterial::epsilon: omega must be > 0");
    return 1.0 - omega_p * omega_p / (omega * omega + kI * nu * omega);
}

Medium vacuum(double omega) { return Medium{omega, cplx(omega, 0.0), cplx(1.0, 0.0)}; }

Medium medium_from_eps(double omega, cplx eps) {
    cplx n = std::sqrt(eps);
    if (n.imag() < 0.0) n = -n;
    return Medium{omega, omega * n, 1.0 / n};
}

cplx scalar_green(cplx k, double R) {
    if (!(R > 0.0)) throw std::invalid_argument("scalar_green: R must be > 0");
    return std::exp(kI * k * R) / (4.0 * kPi * R);
}

FieldPair electric_dipole_fields(const Medium& m, const Vec3& r0, const CVec3& p, const Vec3& r) {
    Vec3 Rv = r - r0;
    double R = Rv.norm();
    if (!(R > 0.0)) throw std::invalid_argument("electric_dipole_fields: observation at source");
    CVec3 n = (Rv / R).cast<cplx>();
    cplx k = m.k, eps = m.eps();
    cplx e = std::exp(kI * k * R);
    CVec3 nxp = cross(n, p);
    FieldPair f;
    f.E = (k * k * cross(nxp, n) / R + (3.0 * n * bdot(n, p) - p) * (1.0 / (R * R * R) - kI * k / (R * R))) *
          e / (4.0 * kPi * eps);
    f.H = (m.omega * k / (4.0 * kPi)) * nxp * (e / R) * (1.0 - 1.0 / (kI * k * R));
    return f;
}

FieldPair magnetic_dipole_fields(const Medium& m, const Vec3& r0, const CVec3& mm, const Vec3& r) {
    // Duality: E -> -zeta H_e(p -> m), H -> E_e(p -> m) / zeta, with p = m / c_medium.
    Vec3 Rv = r - r0;
    double R = Rv.norm();
    if (!(R > 0.0)) throw std::invalid_argument("magnetic_dipole_fields: observation at source");
    CVec3 n = (Rv / R).cast<cplx>();
    cplx k = m.k;
    cplx e = std::exp(kI * k * R);
    CVec3 nxm = cross(n, mm);
    FieldPair f;
    f.H = (k * k * cross(nxm, n) / R + (3.0 * n * bdot(n, mm) - mm) * (1.0 / (R * R * R) - kI * k / (R * R))) *
          e / (4.0 * kPi);
    f.E = -(m.zeta * k * k / (4.0 * kPi)) * nxm * (e / R) * (1.0 - 1.0 / (kI * k * R));
    return f;
}

Fgh fgh(double x) {
    x = std::abs(x);
    if (x < 1e-2) {
        double x2 = x * x;
        // series: sinc = 1 - x^2/6 + x^4/120, j1/x = 1/3 - x^2/30 + x^4/840
        double sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
        double j1x = 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0;
        return {sinc - j1x, sinc - 3.0 * j1x, x * j1x};
    }
    double s = std::sin(x), c = std::cos(x);
    double sinc = s / x;
    double j1 = (s - x * c) / (x * x);
    return {sinc - j1 / x, sinc - 3.0 * j1 / x, j1};
}

cplx pair_power_ee(double k, const Vec3& R, const CVec3& ps, const CVec3& pt) {
    double r = R.norm();
    double k4 = k * k * k * k;
    CVec3 ptc = pt.conjugate();
    cplx pspt = (ps.transpose() * ptc)(0);
    if (r == 0.0) return k4 / (12.0 * kPi) * pspt;
    CVec3 n = (R / r).cast<cplx>();
    Fgh q = fgh(k * r);
    cplx psn = (n.transpose() * ps)(0);
    cplx ptn = (n.transpose() * ptc)(0);
    return k4 / (8.0 * kPi) * (q.f * pspt - q.g * psn * ptn);
}

cplx pair_power_mm(double k, const Vec3& R, const CVec3& ms, const CVec3& mt) {
    return pair_power_ee(k, R, ms, mt);
}

cplx pair_power_em(double k, const Vec3& R, const CVec3& ps, const CVec3& mt) {
    double r = R.norm();
    if (r == 0.0) return 0.0;
    Vec3 n = R / r;
    double k4 = k * k * k * k;
    CVec3 c = cross(ps, mt.conjugate());
    return -kI * k4 / (8.0 * kPi) * fgh(k * r).h * (n.cast<cplx>().transpose() * c)(0);
}

cplx pair_power_me(double k, const Vec3& R, const CVec3& ms, const CVec3& pt) {
    double r = R.norm();
    if (r == 0.0) return 0.0;
    Vec3 n = R / r;
    double k4 = k * k * k * k;
    CVec3 c = cross(ms, pt.conjugate());
    return kI * k4 / (8.0 * kPi) * fgh(k * r).h * (n.cast<cplx>().transpose() * c)(0);
}

Eigen::Matrix3d vacuum_im_green(double k, const Vec3& R) {
    double r = R.norm();
    if (r == 0.0) return Eigen::Matrix3d::Identity() * (k / (6.0 * kPi));
    Vec3 n = R / r;
    Fgh q = fgh(k * r);
    return (k / (4.0 * kPi)) * (q.f * Eigen::Matrix3d::Identity() - q.g * n * n.transpose());
}

RMat vacuum_gamma(double omega, const std::vector<DipoleSource>& emitters) {
    const int n = static_cast<int>(emitters.size());
    RMat G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Eigen::Matrix3d im = vacuum_im_green(omega, emitters[i].position - emitters[j].position);
            G(i, j) = 2.0 * omega * omega * emitters[i].mu * emitters[j].mu *
                      emitters[i].orientation.dot(im * emitters[j].orientation);
        }
    return G;
}

}  // namespace qbem
