// quadrature.hpp — triangle, line and sphere quadrature rules
#pragma once

#include <vector>

#include "qbem/types.hpp"

namespace qbem::quad {

// Barycentric rule on the reference triangle; weights sum to 1.
struct TriangleRule {
    std::vector<Eigen::Vector3d> bary;
    std::vector<double> w;
    int degree = 0;
    std::size_t size() const { return w.size(); }
};

// Symmetric 7-point rule, exact to degree 5.
const TriangleRule& seven_point();
// Collapsed Gauss-Legendre product rule with n*n points, exact to degree 2n-2.
TriangleRule conical(int n);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Product rule over the unit sphere: Gauss-Legendre in cos(theta) times a
// uniform periodic grid in phi. Weights sum to 4*pi.
struct SphereRule {
    std::vector<Vec3> dir;
    std::vector<double> w;
    std::size_t size() const { return w.size(); }
};
SphereRule sphere_product(int n_theta);

}  // namespace qbem::quad
