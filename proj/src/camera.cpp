// SPDX-License-Identifier: Apache-2.0
#include "meshtri/camera.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Geometry>

#include "meshtri/rotation.hpp"

namespace meshtri {

namespace {
constexpr double kMinDepth = 1e-9;
}

void CameraCalib::validate() const {
  if (!Rotation::is_valid(rotation, 1e-9))
    throw Error(ErrorCode::InvariantViolation, "camera rotation is not orthonormal with det +1");
  if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0)
    throw Error(ErrorCode::InvariantViolation, "camera intrinsics must be upper-triangular");
  if (intrinsics(2, 2) != 1.0) throw Error(ErrorCode::InvariantViolation, "intrinsics[2][2] must be 1");
  if (!translation.allFinite() || !intrinsics.allFinite())
    throw Error(ErrorCode::InvariantViolation, "non-finite camera parameters");
  if (height <= 0 || width <= 0) throw Error(ErrorCode::InvariantViolation, "image size must be positive");
}

Eigen::Matrix<double, 3, 4> CameraCalib::projection_matrix() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = rotation;
  rt.col(3) = translation;
  return intrinsics * rt;
}

CameraCalib look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, double focal,
                           int height, int width) {
  const Eigen::Vector3d fwd = (target - eye).normalized();
  Eigen::Vector3d right = fwd.cross(Eigen::Vector3d::UnitY());
  if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();
  right.normalize();
  const Eigen::Vector3d down = fwd.cross(right);
  CameraCalib cam;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = fwd.transpose();
  cam.translation = -cam.rotation * eye;
  cam.intrinsics << focal, 0.0, 0.5 * (width - 1), 0.0, focal, 0.5 * (height - 1), 0.0, 0.0, 1.0;
  cam.height = height;
  cam.width = width;
  return cam;
}

Eigen::Vector2d project_point(const CameraCalib& calib, const Eigen::Vector3d& p) {
  const Eigen::Vector3d pc = calib.rotation * p + calib.translation;
  if (!(pc.z() > kMinDepth))
    throw Error(ErrorCode::NonPositiveDepth, "camera-frame depth " + std::to_string(pc.z()));
  const Eigen::Vector3d h = calib.intrinsics * pc;
  return {h.x() / h.z(), h.y() / h.z()};
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> VoxelGrid::bounds() const {
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  const double h = 0.5 * side_;
  for (int corner = 0; corner < 8; ++corner) {
    const Eigen::Vector3d off((corner & 1) ? h : -h, (corner & 2) ? h : -h, (corner & 4) ? h : -h);
    const Eigen::Vector3d p = center_ + Eigen::AngleAxisd(yaw_, Eigen::Vector3d::UnitY()) * off;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

VoxelGrid make_cuboid(const Eigen::Vector3d& center, double side, int resolution) {
  if (!(side > 0.0) || !std::isfinite(side))
    throw Error(ErrorCode::InvalidDimension, "cuboid side must be positive");
  if (resolution < 2) throw Error(ErrorCode::InvalidDimension, "cuboid resolution must be >= 2");
  VoxelGrid g;
  g.center_ = center;
  g.side_ = side;
  g.res_ = resolution;
  g.coords_.resize(g.voxel_count() * 3);
  const double step = side / resolution;
  std::vector<double> axis(static_cast<std::size_t>(resolution));
  for (int n = 0; n < resolution; ++n) axis[n] = -side / 2 + (n + 0.5) * step;
  std::size_t f = 0;
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      for (int k = 0; k < resolution; ++k, ++f) {
        g.coords_[3 * f] = center.x() + axis[i];
        g.coords_[3 * f + 1] = center.y() + axis[j];
        g.coords_[3 * f + 2] = center.z() + axis[k];
      }
  return g;
}

VoxelGrid rotate_cuboid_yaw(const VoxelGrid& grid, double yaw) {
  VoxelGrid g = grid;
  g.yaw_ = grid.yaw_ + yaw;
  const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
  for (std::size_t f = 0; f < g.voxel_count(); ++f) {
    const Eigen::Vector3d p = r * (grid.coord(f) - grid.center()) + grid.center();
    g.coords_[3 * f] = p.x();
    g.coords_[3 * f + 1] = p.y();
    g.coords_[3 * f + 2] = p.z();
  }
  return g;
}

Pixels project_grid(const CameraCalib& calib, const VoxelGrid& grid) {
  Pixels out(static_cast<Eigen::Index>(grid.voxel_count()), 2);
  for (std::size_t f = 0; f < grid.voxel_count(); ++f) {
    try {
      out.row(static_cast<Eigen::Index>(f)) = project_point(calib, grid.coord(f)).transpose();
    } catch (const Error&) {
      const int l = grid.resolution();
      const std::size_t i = f / (std::size_t(l) * l), j = (f / l) % l, k = f % l;
      throw Error(ErrorCode::NonPositiveDepth, "voxel (" + std::to_string(i) + "," + std::to_string(j) + "," +
                                                   std::to_string(k) + ") is behind the camera");
    }
  }
  return out;
}

void bilinear_sample_into(const FeatureMap& fmap, double x, double y, double* out) {
  const int k = fmap.channels;
  for (int c = 0; c < k; ++c) out[c] = 0.0;
  if (!(x >= 0.0 && y >= 0.0 && x <= fmap.width - 1 && y <= fmap.height - 1)) return;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = std::min(x0 + 1, fmap.width - 1);
  const int y1 = std::min(y0 + 1, fmap.height - 1);
  const double w00 = (1 - fx) * (1 - fy), w01 = fx * (1 - fy), w10 = (1 - fx) * fy, w11 = fx * fy;
  const double* p00 = &fmap.values[(std::size_t(y0) * fmap.width + x0) * k];
  const double* p01 = &fmap.values[(std::size_t(y0) * fmap.width + x1) * k];
  const double* p10 = &fmap.values[(std::size_t(y1) * fmap.width + x0) * k];
  const double* p11 = &fmap.values[(std::size_t(y1) * fmap.width + x1) * k];
  for (int c = 0; c < k; ++c) {
    // Zero-weight taps are skipped so integer coordinates reproduce stored
    // values bit-exactly.
    double v = 0.0;
    if (w00 != 0.0) v += w00 * p00[c];
    if (w01 != 0.0) v += w01 * p01[c];
    if (w10 != 0.0) v += w10 * p10[c];
    if (w11 != 0.0) v += w11 * p11[c];
    out[c] = v;
  }
}

std::vector<double> bilinear_sample(const FeatureMap& fmap, const Pixels& coords) {
  std::vector<double> out(static_cast<std::size_t>(coords.rows()) * fmap.channels);
  for (Eigen::Index m = 0; m < coords.rows(); ++m)
    bilinear_sample_into(fmap, coords(m, 0), coords(m, 1), &out[static_cast<std::size_t>(m) * fmap.channels]);
  return out;
}

}  // namespace meshtri
