// SPDX-License-Identifier: Apache-2.0
#include "meshtri/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "json_util.hpp"

namespace meshtri {

namespace {

Eigen::VectorXd errors_mm(const Points& pred, const Points& gt) {
  if (pred.rows() != gt.rows())
    throw Error(ErrorCode::ShapeMismatch, std::to_string(pred.rows()) + " vs " + std::to_string(gt.rows()) + " rows");
  return (pred - gt).rowwise().norm() * 1000.0;
}

double mean_error_mm(const Points& pred, const Points& gt) {
  const Eigen::VectorXd e = errors_mm(pred, gt);
  return e.size() ? e.mean() : 0.0;
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

double mpjpe(const Points& pred, const Points& gt) { return mean_error_mm(pred, gt); }
double mpve(const Points& pred, const Points& gt) { return mean_error_mm(pred, gt); }

double angular_distance(const Rotation& r, const Rotation& r_star) {
  const double s = std::clamp((r.matrix() - r_star.matrix()).norm() / (2.0 * std::numbers::sqrt2), 0.0, 1.0);
  if (s < 0.99) return 2.0 * std::asin(s) * kRadToDeg;
  // Near 180° asin loses precision; pair the same sine with the cosine of the
  // half angle read from the relative rotation's quaternion.
  const Eigen::Quaterniond q(Eigen::Matrix3d(r.matrix().transpose() * r_star.matrix()));
  return 2.0 * std::atan2(s, std::abs(q.w()) / q.norm()) * kRadToDeg;
}

double angular_distance(const Eigen::Matrix3d& r, const Eigen::Matrix3d& r_star) {
  return angular_distance(Rotation(r), Rotation(r_star));
}

const std::array<const char*, kNumAngularJoints>& angular_joint_names() {
  static const std::array<const char*, kNumAngularJoints> names = {
      "pelvis", "L-hip",  "R-hip",  "torso",  "L-knee", "R-knee", "spine",  "L-ankl", "R-ankl", "chest",
      "neck",   "L-thrx", "R-thrx", "head",   "L-shld", "R-shld", "L-elbw", "R-elbw", "L-wrst", "R-wrst"};
  return names;
}

const std::array<int, kNumAngularJoints>& angular_joint_smpl_index() {
  static const std::array<int, kNumAngularJoints> idx = {0,  1,  2,  3,  4,  5,  6,  7,  8,  9,
                                                          12, 13, 14, 15, 16, 17, 18, 19, 20, 21};
  return idx;
}

std::vector<double> per_joint_angular(const std::vector<Rotation>& pred, const std::vector<Rotation>& gt) {
  if (pred.size() != kNumAngularJoints || gt.size() != kNumAngularJoints)
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(kNumAngularJoints) + " rotations per side, got " +
                                               std::to_string(pred.size()) + " and " + std::to_string(gt.size()));
  std::vector<double> out(kNumAngularJoints);
  for (int i = 0; i < kNumAngularJoints; ++i) out[i] = angular_distance(pred[i], gt[i]);
  return out;
}

std::vector<Rotation> table_rotations(std::span<const double> pose, const Rotation& global) {
  if (pose.size() != static_cast<std::size_t>(kPoseDims))
    throw Error(ErrorCode::DimensionMismatch, "pose needs " + std::to_string(kPoseDims) + " values");
  std::vector<Rotation> out;
  for (int j : angular_joint_smpl_index()) {
    if (j == 0) {
      out.push_back(global);
      continue;
    }
    out.push_back(axis_angle_to_matrix({pose[3 * (j - 1)], pose[3 * (j - 1) + 1], pose[3 * (j - 1) + 2]}));
  }
  return out;
}

double pck3d(const Points& pred, const Points& gt, double threshold_mm) {
  if (!(threshold_mm > 0.0)) throw Error(ErrorCode::InvalidArgument, "PCK threshold must be positive");
  const Eigen::VectorXd e = errors_mm(pred, gt);
  if (e.size() == 0) return 0.0;
  int below = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i)
    if (e[i] < threshold_mm) ++below;
  return 100.0 * below / static_cast<double>(e.size());
}

std::vector<double> auc_thresholds_mm() {
  std::vector<double> t;
  for (int mm = 5; mm <= 150; mm += 5) t.push_back(mm);
  return t;
}

double auc(const Points& pred, const Points& gt) {
  const auto ts = auc_thresholds_mm();
  double s = 0.0;
  for (double t : ts) s += pck3d(pred, gt, t);
  return s / static_cast<double>(ts.size());
}

std::string MetricReport::to_json() const {
  jsonio::ojson per = jsonio::ojson::object();
  for (std::size_t i = 0; i < per_joint_angular.size() && i < kNumAngularJoints; ++i)
    per[angular_joint_names()[i]] = per_joint_angular[i];
  jsonio::ojson auc_grid = {{"from_mm", 5.0}, {"to_mm", 150.0}, {"step_mm", 5.0}};
  const jsonio::ojson j = {{"mpjpe_mm", mpjpe},
                           {"mpve_mm", mpve},
                           {"mean_angular_deg", mean_angular},
                           {"per_joint_angular_deg", per},
                           {"pck", pck},
                           {"pck_threshold_mm", pck_threshold_mm},
                           {"auc", auc},
                           {"auc_grid", auc_grid}};
  return jsonio::dump(j, 6);
}

std::string MetricReport::angular_csv() const {
  std::string out = "joint,angular_deg\n";
  char buf[64];
  for (std::size_t i = 0; i < per_joint_angular.size() && i < kNumAngularJoints; ++i) {
    std::snprintf(buf, sizeof buf, "%s,%.6f\n", angular_joint_names()[i], per_joint_angular[i]);
    out += buf;
  }
  return out;
}

MetricReport evaluate(const EvalInput& in) {
  MetricReport r;
  r.mpjpe = mpjpe(in.pred_joints, in.gt_joints);
  r.mpve = mpve(in.pred_mesh, in.gt_mesh);
  r.per_joint_angular = per_joint_angular(in.pred_rots, in.gt_rots);
  double s = 0.0;
  for (double a : r.per_joint_angular) s += a;
  r.mean_angular = s / kNumAngularJoints;
  r.pck = pck3d(in.pred_joints, in.gt_joints, r.pck_threshold_mm);
  r.auc = auc(in.pred_joints, in.gt_joints);
  return r;
}

}  // namespace meshtri
