#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

namespace rqt {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;
using Vec4c = Eigen::Vector4cd;
using Mat4c = Eigen::Matrix4cd;

// eta_IJ = diag(1,-1,-1,-1); numerically its own inverse
inline const Mat4& eta() {
  static const Mat4 m = Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  return m;
}

inline double mdot(const Vec4& a, const Vec4& b) {
  return a(0) * b(0) - a(1) * b(1) - a(2) * b(2) - a(3) * b(3);
}

inline Vec4 lower(const Vec4& v) { return Vec4(v(0), -v(1), -v(2), -v(3)); }

constexpr double kPi = 3.14159265358979323846;

// omega[mu](I,J) = omega_mu^I_J
using Connection = std::array<Mat4, 4>;
// gamma[s](n,r) = Gamma^s_{nr}
using Christoffel = std::array<Mat4, 4>;

}  // namespace rqt
