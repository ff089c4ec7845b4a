// emcore.hpp — material models, Green functions and point-dipole primitives
//
// Units: hbar = eps0 = mu0 = c = 1, so k = omega in vacuum and the vacuum
// impedance is 1. Time dependence exp(-i omega t).
#pragma once

#include <vector>

#include "qbem/types.hpp"

namespace qbem {

struct DrudeMaterial {
    double omega_p = 1.0;
    double nu = 0.01;
    cplx epsilon(double omega) const;
};

// Homogeneous medium at one frequency: wavenumber (Im >= 0) and impedance.
struct Medium {
    double omega = 0.0;
    cplx k;
    cplx zeta;
    cplx eps() const { return k / (omega * zeta); }
    cplx mu() const { return k * zeta / omega; }
};

Medium vacuum(double omega);
Medium medium_from_eps(double omega, cplx eps);

struct DipoleSource {
    Vec3 position;
    Vec3 orientation;  // unit vector
    double mu = 1.0;   // dipole magnitude
    CVec3 moment() const { return (mu * orientation).cast<cplx>(); }
};

// exp(i k R) / (4 pi R)
cplx scalar_green(cplx k, double R);

struct FieldPair {
    CVec3 E = CVec3::Zero();
    CVec3 H = CVec3::Zero();
};

// Fields of an electric dipole p at r0 in a homogeneous medium, observed at r.
FieldPair electric_dipole_fields(const Medium& m, const Vec3& r0, const CVec3& p, const Vec3& r);
// Fields of a magnetic dipole moment m (magnetic current -i omega mu m).
FieldPair magnetic_dipole_fields(const Medium& m, const Vec3& r0, const CVec3& mm, const Vec3& r);

// Radial functions of the pairwise radiated power:
// f = sinc(x) - j1(x)/x, g = sinc(x) - 3 j1(x)/x, h = j1(x). Limits f(0)=2/3, g(0)=0, h(0)=0.
struct Fgh {
    double f, g, h;
};
Fgh fgh(double x);

// Cross radiated power between two point dipoles in vacuum at wavenumber k,
// each either electric (p) or magnetic (m); R = r_s - r_t.
cplx pair_power_ee(double k, const Vec3& R, const CVec3& ps, const CVec3& pt);
cplx pair_power_mm(double k, const Vec3& R, const CVec3& ms, const CVec3& mt);
cplx pair_power_em(double k, const Vec3& R, const CVec3& ps, const CVec3& mt);
cplx pair_power_me(double k, const Vec3& R, const CVec3& ms, const CVec3& pt);

// Im of the vacuum dyadic Green function, normalised so that the diagonal is k/(6 pi).
Eigen::Matrix3d vacuum_im_green(double k, const Vec3& R);

// Vacuum rate matrix 2 omega^2 mu_i mu_j u_i . Im G0 . u_j.
RMat vacuum_gamma(double omega, const std::vector<DipoleSource>& emitters);

}  // namespace qbem
