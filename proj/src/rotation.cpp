// SPDX-License-Identifier: Apache-2.0
#include "meshtri/rotation.hpp"

#include <Eigen/Geometry>

namespace meshtri {

bool Rotation::is_valid(const Eigen::Matrix3d& m, double tol) {
  if (!m.allFinite()) return false;
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation::Rotation(const Eigen::Matrix3d& m, double tol) : m_(m) {
  if (!is_valid(m, tol)) throw Error(ErrorCode::InvalidRotation, "matrix is not a proper rotation");
}

Rotation rot6d_to_matrix(std::span<const double, 6> r6) {
  const Eigen::Vector3d a1(r6[0], r6[1], r6[2]);
  const Eigen::Vector3d a2(r6[3], r6[4], r6[5]);
  if (!a1.allFinite() || !a2.allFinite())
    throw Error(ErrorCode::DegenerateInput, "non-finite 6D rotation");
  if (a1.norm() < 1e-12) throw Error(ErrorCode::DegenerateInput, "first 6D column is zero");
  const Eigen::Vector3d b1 = a1.normalized();
  if ((a2 - b1.dot(a2) * b1).norm() < 1e-12)
    throw Error(ErrorCode::DegenerateInput, "second 6D column is parallel to the first");
  const auto m = rot::from_6d(r6.data());
  return Rotation(Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(m.data()));
}

Rotation axis_angle_to_matrix(const Eigen::Vector3d& aa) {
  const auto m = rot::from_axis_angle(aa.data());
  return Rotation(Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(m.data()));
}

Eigen::Vector3d matrix_to_axis_angle(const Rotation& r) {
  const Eigen::AngleAxisd aa(Eigen::Quaterniond(r.matrix()).normalized());
  return aa.axis() * aa.angle();
}

std::array<double, 6> matrix_to_rot6d(const Rotation& r) {
  const auto& m = r.matrix();
  return {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
}

}  // namespace meshtri
