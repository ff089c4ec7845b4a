// potentials.hpp — triangle integrals of the Helmholtz kernel and its gradient
#pragma once

#include <vector>

#include "qbem/mesh.hpp"
#include "qbem/quadrature.hpp"

namespace qbem {

// Cached geometry of one flat triangle.
struct TriGeom {
    Vec3 v[3];
    Vec3 n;
    double area = 0.0;
    Vec3 centroid;
    double diam = 0.0;
    Vec3 edge_dir[3];   // unit vector v[i] -> v[i+1]
    Vec3 edge_out[3];   // in-plane outward edge normal
};

std::vector<TriGeom> triangle_geometry(const TriangleMesh& mesh);

// Closed-form integrals over a triangle of the static kernel 1/R (no 1/(4 pi)).
struct StaticPotentials {
    double s0 = 0.0;              // int 1/R
    Vec3 srho = Vec3::Zero();     // int (rho' - rho)/R, rho = projection of r onto the plane
    Vec3 grad = Vec3::Zero();     // grad_r int 1/R
    Vec3 rho = Vec3::Zero();
};
StaticPotentials static_potentials(const TriGeom& tri, const Vec3& r);

// Kernel moments of one triangle seen from r:
// i0 = int g, i1 = int g r', g1 = int grad_r g, g2 = int grad_r g x r'.
struct Moments {
    cplx i0 = 0.0;
    CVec3 i1 = CVec3::Zero();
    CVec3 g1 = CVec3::Zero();
    CVec3 g2 = CVec3::Zero();
};

// Plain quadrature of the full kernel.
Moments moments_regular(const TriGeom& tri, const quad::TriangleRule& rule, cplx k, const Vec3& r);
// Static part in closed form plus quadrature of the smooth remainder.
Moments moments_singular(const TriGeom& tri, const quad::TriangleRule& rule, cplx k, const Vec3& r);

}  // namespace qbem
