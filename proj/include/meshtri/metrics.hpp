// SPDX-License-Identifier: Apache-2.0
//
// Pose and mesh evaluation metrics. Distances are reported in millimeters
// for inputs in meters; angles in degrees.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "meshtri/body_model.hpp"
#include "meshtri/rotation.hpp"

namespace meshtri {

inline constexpr int kNumAngularJoints = 20;
inline constexpr double kPckThresholdMm = 150.0;

/// Mean Euclidean joint error in mm, no root alignment.
double mpjpe(const Points& pred, const Points& gt);
/// Mean Euclidean vertex error in mm.
double mpve(const Points& pred, const Points& gt);

/// 2·asin(‖R − R*‖_F / 2√2) in degrees.
double angular_distance(const Rotation& r, const Rotation& r_star);
/// Validates both matrices first (InvalidRotation).
double angular_distance(const Eigen::Matrix3d& r, const Eigen::Matrix3d& r_star);

/// Short names of the 20 joints in the per-joint rotation table.
const std::array<const char*, kNumAngularJoints>& angular_joint_names();
/// SMPL joint index of each table entry.
const std::array<int, kNumAngularJoints>& angular_joint_smpl_index();

std::vector<double> per_joint_angular(const std::vector<Rotation>& pred, const std::vector<Rotation>& gt);

/// Parent-relative rotations of the table joints; the pelvis entry is the
/// global orientation.
std::vector<Rotation> table_rotations(std::span<const double> pose, const Rotation& global);

/// Percentage of joints with error strictly below `threshold_mm`.
double pck3d(const Points& pred, const Points& gt, double threshold_mm = kPckThresholdMm);
/// Mean PCK over the thresholds 5, 10, ..., 150 mm.
double auc(const Points& pred, const Points& gt);
std::vector<double> auc_thresholds_mm();

struct MetricReport {
  double mpjpe = 0.0;
  double mpve = 0.0;
  double mean_angular = 0.0;
  std::vector<double> per_joint_angular;
  double pck = 0.0;
  double pck_threshold_mm = kPckThresholdMm;
  double auc = 0.0;

  /// Fixed key order and "%.6f" floats.
  std::string to_json() const;
  /// One "joint,degrees" row per table joint.
  std::string angular_csv() const;
};

struct EvalInput {
  Points pred_joints, gt_joints;
  Points pred_mesh, gt_mesh;
  std::vector<Rotation> pred_rots, gt_rots;
};

MetricReport evaluate(const EvalInput& in);

}  // namespace meshtri
