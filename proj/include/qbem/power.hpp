// power.hpp — absorbed, radiated and emitted power matrices from BEM currents
#pragma once

#include <vector>

#include "qbem/bem.hpp"

namespace qbem {

// Scattered fields of the current solution columns X (2N x n_src) at a point.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const OperatorAssembler& op, int order = 0);
    std::vector<FieldPair> scattered(double omega, const CMat& X, const Vec3& r) const;

private:
    const OperatorAssembler& op_;
    quad::TriangleRule rule_;
};

struct EnclosingSphere {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
    bool valid = false;
};

// Sphere midway between the circumscribing radius of the mesh and the nearest emitter;
// invalid if an emitter lies inside the circumscribing sphere.
EnclosingSphere enclosing_sphere(const TriangleMesh& mesh, const std::vector<DipoleSource>& emitters);

struct PowerMatrices {
    double omega = 0.0;
    CMat P_abs;
    CMat P_rad;
    RMat P_em;
    // diagnostics
    int sphere_order = 0;          // Gauss-Legendre points in theta used for the flux (0: surface route)
    double sphere_radius = 0.0;
    double flux_change = 0.0;      // relative change at the last order escalation
    double rcond = 0.0;
    CMat P_rad_quad;  // angular-quadrature cross-check, empty unless requested
};

struct PowerOptions {
    int sphere_order_start = 16;
    int sphere_order_step = 8;
    int sphere_order_max = 96;
    double sphere_tol = 1e-3;
    int sphere_field_order = 4;
    bool force_surface = false;
    int prad_quadrature_order = 0;  // > 0: also integrate the far field with this many theta nodes
};

// Inward Poynting flux of total fields through a sphere with a fixed product rule.
CMat absorbed_power_sphere(const OperatorAssembler& op, const FieldEvaluator& fe, double omega,
                           const std::vector<DipoleSource>& emitters, const CMat& X,
                           const EnclosingSphere& s, int n_theta);
// Inward flux evaluated on the body surface from the equivalent currents.
CMat absorbed_power_surface(const OperatorAssembler& op, const CMat& X);

// Radiated power from the equivalent point-dipole picture of the RWG currents.
CMat radiated_power_analytic(const RwgBasis& basis, double omega, const std::vector<DipoleSource>& emitters,
                             const CMat& X);
// Far-field amplitudes (per emitter column) on the given directions.
std::vector<std::vector<CVec3>> far_field(const OperatorAssembler& op, double omega,
                                          const std::vector<DipoleSource>& emitters, const CMat& X,
                                          const std::vector<Vec3>& dirs);
// Radiated power by angular quadrature of the far field.
CMat radiated_power_quadrature(const OperatorAssembler& op, double omega,
                               const std::vector<DipoleSource>& emitters, const CMat& X, int n_theta);

// (omega mu_i / 2) Im[u_i . E_j(r_i)], self term regularised by the vacuum reaction field.
RMat emitted_power(const FieldEvaluator& fe, double omega, const std::vector<DipoleSource>& emitters,
                   const CMat& X);

// Full per-frequency pipeline: assemble, solve, and evaluate the three power matrices.
PowerMatrices compute_powers(const OperatorAssembler& op, double omega, const DrudeMaterial& mat,
                             const std::vector<DipoleSource>& emitters, const PowerOptions& popts = {});

}  // namespace qbem
