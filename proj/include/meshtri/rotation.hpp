// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <span>

#include <Eigen/Core>

#include "meshtri/ad.hpp"
#include "meshtri/error.hpp"

namespace meshtri {

/// Orthonormal 3x3 matrix with determinant +1.
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}

  /// Throws InvalidRotation unless RᵀR = I and det R = 1 within `tol`.
  explicit Rotation(const Eigen::Matrix3d& m, double tol = 1e-9);

  static Rotation identity() { return Rotation(); }
  static bool is_valid(const Eigen::Matrix3d& m, double tol = 1e-9);

  const Eigen::Matrix3d& matrix() const { return m_; }

  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, 1e-6); }

 private:
  Eigen::Matrix3d m_;
};

Rotation rot6d_to_matrix(std::span<const double, 6> r6);
Rotation axis_angle_to_matrix(const Eigen::Vector3d& aa);
/// Angle of the result lies in [0, π].
Eigen::Vector3d matrix_to_axis_angle(const Rotation& r);
/// First two columns of R, the inverse of rot6d_to_matrix up to scale.
std::array<double, 6> matrix_to_rot6d(const Rotation& r);

namespace rot {

template <class T>
using Mat3 = std::array<T, 9>;  // row-major

/// Gram–Schmidt on the two 3-vectors (a1 = r6[0..2], a2 = r6[3..5]);
/// the result has columns (b1, b2, b1 × b2).
template <class T>
Mat3<T> from_6d(const T* r6) {
  using std::sqrt;
  const T a1[3] = {r6[0], r6[1], r6[2]};
  const T a2[3] = {r6[3], r6[4], r6[5]};
  const T n1 = sqrt(a1[0] * a1[0] + a1[1] * a1[1] + a1[2] * a1[2]);
  const T b1[3] = {a1[0] / n1, a1[1] / n1, a1[2] / n1};
  const T d = b1[0] * a2[0] + b1[1] * a2[1] + b1[2] * a2[2];
  const T u[3] = {a2[0] - d * b1[0], a2[1] - d * b1[1], a2[2] - d * b1[2]};
  const T n2 = sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
  const T b2[3] = {u[0] / n2, u[1] / n2, u[2] / n2};
  const T b3[3] = {b1[1] * b2[2] - b1[2] * b2[1], b1[2] * b2[0] - b1[0] * b2[2],
                   b1[0] * b2[1] - b1[1] * b2[0]};
  return {b1[0], b2[0], b3[0], b1[1], b2[1], b3[1], b1[2], b2[2], b3[2]};
}

/// Rodrigues' formula. Below a small angle the coefficients sin(a)/a and
/// (1 - cos a)/a² switch to their Taylor series in a², which keeps the
/// derivative exact at the zero rotation.
template <class T>
Mat3<T> from_axis_angle(const T* aa) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const T x = aa[0], y = aa[1], z = aa[2];
  const T a2 = x * x + y * y + z * z;
  T s, c;
  const double a2v = ad::value(a2);
  if (a2v < 1e-8) {
    s = 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
    c = 0.5 - a2 / 24.0 + a2 * a2 / 720.0;
  } else {
    const T a = sqrt(a2);
    s = sin(a) / a;
    c = (1.0 - cos(a)) / a2;
  }
  // R = I + s K + c K², K = [aa]×, K² = aa aaᵀ - a² I
  return {1.0 + c * (x * x - a2), -s * z + c * x * y,      s * y + c * x * z,
          s * z + c * x * y,      1.0 + c * (y * y - a2),  -s * x + c * y * z,
          -s * y + c * x * z,     s * x + c * y * z,       1.0 + c * (z * z - a2)};
}

template <class T>
Mat3<T> mul(const Mat3<T>& a, const Mat3<T>& b) {
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r[i * 3 + j] = a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
  return r;
}

}  // namespace rot

}  // namespace meshtri
