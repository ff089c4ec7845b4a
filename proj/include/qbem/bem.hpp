// bem.hpp — PMCHWT Galerkin system on RWG functions
//
// Z = [ z-T- + z+T+ ,  K- + K+      ]
//     [ -(K- + K+)   ,  T-/z- + T+/z+ ]
// with T the tested L operator and K the tested (minus) curl operator. The
// solution coefficients are the electric/magnetic currents whose exterior
// radiation is the scattered field.
#pragma once

#include <array>
#include <vector>

#include "qbem/emcore.hpp"
#include "qbem/mesh.hpp"
#include "qbem/potentials.hpp"

namespace qbem {

struct BemOptions {
    double near_factor = 2.0;    // pair is near if centroid distance < factor * max diameter
    int near_outer_order = 4;    // conical order of the outer rule on near pairs
    int rhs_order = 5;           // conical order for incident-field testing
    int field_order = 5;         // conical order for field evaluation from currents
    double cond_limit = 1e12;
};

// Local 3x3 blocks between the RWG halves of a test and a source triangle.
struct PairBlocks {
    Eigen::Matrix3cd T = Eigen::Matrix3cd::Zero();
    Eigen::Matrix3cd K = Eigen::Matrix3cd::Zero();
};

class OperatorAssembler {
public:
    OperatorAssembler(const TriangleMesh& mesh, const RwgBasis& basis, BemOptions opts = {});

    const TriangleMesh& mesh() const { return mesh_; }
    const RwgBasis& basis() const { return basis_; }
    const std::vector<TriGeom>& geometry() const { return geom_; }
    const BemOptions& options() const { return opts_; }
    bool is_near(int p, int q) const;

    PairBlocks pair(int p, int q, cplx k) const;
    // Reference evaluation: both triangles integrated with conical(n) rules, singular
    // static part handled in closed form if the pair is near.
    PairBlocks pair_with_order(int p, int q, cplx k, int outer_order, int inner_order) const;

    // Full T and K for one medium. body < 0 couples all triangles, otherwise only
    // triangles of that body.
    void assemble(cplx k, int body, CMat& T, CMat& K) const;

    // PMCHWT matrix for exterior vacuum and one Drude material for all bodies.
    CMat assemble_pmchwt(double omega, const DrudeMaterial& mat) const;

    // Tested incident fields; returns -[<f, E_inc>; <f, H_inc>], one column per emitter.
    CMat dipole_rhs(double omega, const std::vector<DipoleSource>& emitters) const;

private:
    const TriangleMesh& mesh_;
    const RwgBasis& basis_;
    BemOptions opts_;
    std::vector<TriGeom> geom_;
    std::vector<std::vector<int>> colors_;
    std::vector<std::array<Vec3, 7>> qpts_;  // seven-point rule nodes per triangle
    // Regular (far) pair for the exterior and optionally an interior medium in one pass.
    void regular_pair(int p, int q, cplx k_ext, cplx k_int, bool with_int, PairBlocks& be,
                      PairBlocks& bi) const;
    PairBlocks pair_impl(int p, int q, cplx k, const quad::TriangleRule& outer,
                         const quad::TriangleRule& inner, bool singular) const;
};

struct SolveResult {
    CMat X;
    double rcond = 0.0;
};

// Dense LU with multiple right-hand sides. Throws NumericalError when the
// reciprocal condition estimate is below 1/cond_limit or the result is not finite.
SolveResult factor_and_solve(CMat Z, const CMat& V, double cond_limit = 1e12);

}  // namespace qbem
