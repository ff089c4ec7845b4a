// types.hpp — shared scalar and vector aliases
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qbem {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

// Bilinear cross product (Eigen's cross() conjugates complex results).
inline CVec3 cross(const CVec3& a, const CVec3& b) {
    return CVec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}
// Bilinear dot product (no conjugation).
inline cplx bdot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace qbem
