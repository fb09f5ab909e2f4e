// SPDX-License-Identifier: Apache-2.0
//
// Pinhole cameras, the cubic voxel grid, grid projection and bilinear
// sampling of feature maps.
//
// Pixel convention: the center of pixel (x, y) sits at real coordinates
// (x, y), origin top-left, x to the right and y down. World axes are
// right-handed with +y vertical.
#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "meshtri/error.hpp"

namespace meshtri {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Pixels = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

struct CameraCalib {
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  int height = 0;
  int width = 0;

  /// Throws InvariantViolation when rotation is not a proper rotation or the
  /// intrinsics are not upper-triangular with K[2][2] = 1.
  void validate() const;

  Eigen::Matrix<double, 3, 4> projection_matrix() const;
  Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
  double depth(const Eigen::Vector3d& p) const { return (rotation * p + translation).z(); }
};

/// Camera looking from `eye` at `target`, image y axis pointing towards -up.
CameraCalib look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                           double focal, int height, int width);

Eigen::Vector2d project_point(const CameraCalib& calib, const Eigen::Vector3d& p);

/// Cubic cuboid of L³ voxels. Voxel (i, j, k) spans x, y, z respectively.
class VoxelGrid {
 public:
  VoxelGrid() = default;

  const Eigen::Vector3d& center() const { return center_; }
  double side() const { return side_; }
  int resolution() const { return res_; }
  double pitch() const { return side_ / res_; }
  /// Rotation of the cuboid about the vertical axis through its center.
  double yaw() const { return yaw_; }
  std::size_t voxel_count() const { return static_cast<std::size_t>(res_) * res_ * res_; }

  std::size_t flat_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * res_ + j) * res_ + k;
  }
  Eigen::Vector3d coord(std::size_t flat) const {
    return {coords_[3 * flat], coords_[3 * flat + 1], coords_[3 * flat + 2]};
  }
  Eigen::Vector3d coord(int i, int j, int k) const { return coord(flat_index(i, j, k)); }
  /// Row-major L³ x 3 voxel-center coordinates.
  const std::vector<double>& coords() const { return coords_; }

  /// World-space axis-aligned bounds of the voxel centers' cuboid.
  std::pair<Eigen::Vector3d, Eigen::Vector3d> bounds() const;

  friend VoxelGrid make_cuboid(const Eigen::Vector3d& center, double side, int resolution);
  friend VoxelGrid rotate_cuboid_yaw(const VoxelGrid& grid, double yaw);

 private:
  Eigen::Vector3d center_ = Eigen::Vector3d::Zero();
  double side_ = 0.0;
  int res_ = 0;
  double yaw_ = 0.0;
  std::vector<double> coords_;
};

inline constexpr double kDefaultCuboidSide = 2.0;
inline constexpr int kDefaultResolution = 64;

VoxelGrid make_cuboid(const Eigen::Vector3d& center, double side = kDefaultCuboidSide,
                      int resolution = kDefaultResolution);
/// Same grid with its coordinates rotated by `yaw` radians about the
/// vertical axis through the grid center (composes with an existing yaw).
VoxelGrid rotate_cuboid_yaw(const VoxelGrid& grid, double yaw);

/// L³ x 2 image coordinates, row-major in voxel flat order.
Pixels project_grid(const CameraCalib& calib, const VoxelGrid& grid);

/// H x W x K feature image, row-major [y][x][k].
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> values;

  FeatureMap() = default;
  FeatureMap(int h, int w, int k) : height(h), width(w), channels(k), values(std::size_t(h) * w * k, 0.0) {}

  double& at(int y, int x, int c) { return values[(std::size_t(y) * width + x) * channels + c]; }
  double at(int y, int x, int c) const { return values[(std::size_t(y) * width + x) * channels + c]; }
};

/// Writes K values for one coordinate into `out`; zeros outside [0,W-1]x[0,H-1].
void bilinear_sample_into(const FeatureMap& fmap, double x, double y, double* out);
/// M x K row-major samples.
std::vector<double> bilinear_sample(const FeatureMap& fmap, const Pixels& coords);

}  // namespace meshtri
