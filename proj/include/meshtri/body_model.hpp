// SPDX-License-Identifier: Apache-2.0
//
// Articulated body model with linear blend skinning.
//
// The forward function is written once as a template over the scalar type
// so the same code produces plain values (double) and recorded gradients
// (ad::Var). Joints are required to be topologically ordered
// (parents[j] < j), which holds for the SMPL kinematic tree.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "meshtri/camera.hpp"
#include "meshtri/rotation.hpp"

namespace meshtri {

using Faces = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 3, Eigen::RowMajor>;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kNumJoints = 24;
inline constexpr int kNumRegressedJoints = 17;
inline constexpr int kNumBetas = 10;
inline constexpr int kPoseDims = 3 * (kNumJoints - 1);

/// A bending degree of freedom penalized by exp(sign · θ[joint][axis]).
struct HingeDof {
  int joint = 0;
  int axis = 0;
  int sign = 1;
  bool operator==(const HingeDof&) const = default;
};

struct BodyModel {
  Points template_verts;        // V x 3, meters
  Faces faces;                  // F x 3
  int num_betas = 0;            // B
  std::vector<double> shape_dirs;  // V x 3 x B, index (v * 3 + d) * B + b
  RowMatrix skin_weights;       // V x J
  RowMatrix joint_regressor;    // 17 x V  (G)
  RowMatrix rest_joint_regressor;  // J x V
  std::vector<int> parents;     // parents[0] = -1
  std::vector<HingeDof> hinge_dofs;
  std::array<int, 2> wrist_joints{20, 21};

  int num_vertices() const { return static_cast<int>(template_verts.rows()); }
  int num_joints() const { return static_cast<int>(parents.size()); }
  int pose_dims() const { return 3 * (num_joints() - 1); }

  /// Throws InvariantViolation on any broken invariant, then rebuilds the
  /// derived caches. Must be called after the arrays are filled or edited.
  void finalize();

  /// Bitwise equality of every stored array.
  bool same_data(const BodyModel& other) const;

  // Derived caches, filled by finalize().
  struct SkinEntry {
    int joint;
    double weight;
  };
  std::vector<std::size_t> skin_offsets;  // V + 1
  std::vector<SkinEntry> skin_entries;
  std::vector<double> joint_template;    // J x 3
  std::vector<double> joint_shape_dirs;  // J x 3 x B
  std::vector<std::vector<std::pair<int, double>>> regressor_rows;  // sparse G
};

/// Parameters of one fitted or ground-truth body: pose code z, 6D global
/// rotation, shape and translation.
struct FitParams {
  std::vector<double> z;
  std::array<double, 6> rot6d{1, 0, 0, 0, 1, 0};
  std::vector<double> beta;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static FitParams neutral(int pose_code_dims, int num_betas) {
    FitParams p;
    p.z.assign(static_cast<std::size_t>(pose_code_dims), 0.0);
    p.beta.assign(static_cast<std::size_t>(num_betas), 0.0);
    return p;
  }
  bool all_finite() const;
};

Points lbs_forward(const BodyModel& model, std::span<const double> pose, const Rotation& global,
                   std::span<const double> beta, const Eigen::Vector3d& t);

/// Rest joint locations of the shaped template (J x 3).
Points rest_joints(const BodyModel& model, std::span<const double> beta);

/// G · mesh, 17 x 3.
Points regress_joints(const BodyModel& model, const Points& mesh);

/// Deterministic capsule-limb humanoid in SMPL joint topology.
BodyModel make_toy_model(std::uint64_t seed = 0, int vertex_budget = 1500);

/// Model container: JSON header at `path`, little-endian float64/int32
/// arrays in `path + ".bin"`.
void save_model(const BodyModel& model, const std::string& path);
BodyModel load_model(const std::string& path);

/// SMPL joint names (24).
const std::array<const char*, kNumJoints>& smpl_joint_names();

namespace lbs {

template <class T>
struct PosedSkeleton {
  std::vector<rot::Mat3<T>> rot;           // world rotation of each skinning transform
  std::vector<std::array<T, 3>> offset;    // translation of each skinning transform
};

/// Forward kinematics: skinning transforms A_j = G_j · [I | -J_j] for the
/// shaped rest joints J(β).
template <class T>
PosedSkeleton<T> pose_skeleton(const BodyModel& m, const T* pose, const rot::Mat3<T>& global, const T* beta) {
  const int nj = m.num_joints();
  const int nb = m.num_betas;
  std::vector<std::array<T, 3>> rest(static_cast<std::size_t>(nj));
  for (int j = 0; j < nj; ++j)
    for (int d = 0; d < 3; ++d) {
      T v = m.joint_template[j * 3 + d];
      const double* dirs = &m.joint_shape_dirs[(static_cast<std::size_t>(j) * 3 + d) * nb];
      for (int b = 0; b < nb; ++b) v += dirs[b] * beta[b];
      rest[j][d] = v;
    }
  PosedSkeleton<T> s;
  s.rot.resize(static_cast<std::size_t>(nj));
  s.offset.resize(static_cast<std::size_t>(nj));
  std::vector<std::array<T, 3>> origin(static_cast<std::size_t>(nj));
  s.rot[0] = global;
  origin[0] = rest[0];
  for (int j = 1; j < nj; ++j) {
    const int p = m.parents[j];
    const auto local = rot::from_axis_angle(pose + 3 * (j - 1));
    s.rot[j] = rot::mul(s.rot[p], local);
    const T d[3] = {rest[j][0] - rest[p][0], rest[j][1] - rest[p][1], rest[j][2] - rest[p][2]};
    for (int r = 0; r < 3; ++r)
      origin[j][r] = s.rot[p][r * 3] * d[0] + s.rot[p][r * 3 + 1] * d[1] + s.rot[p][r * 3 + 2] * d[2] + origin[p][r];
  }
  for (int j = 0; j < nj; ++j)
    for (int r = 0; r < 3; ++r)
      s.offset[j][r] = origin[j][r] - (s.rot[j][r * 3] * rest[j][0] + s.rot[j][r * 3 + 1] * rest[j][1] +
                                       s.rot[j][r * 3 + 2] * rest[j][2]);
  return s;
}

/// Skins the listed vertices; `out` receives 3 values per id.
template <class T>
void skin_vertices(const BodyModel& m, const PosedSkeleton<T>& s, const T* beta, const T* t,
                   std::span<const int> ids, T* out) {
  const int nb = m.num_betas;
  for (std::size_t n = 0; n < ids.size(); ++n) {
    const int v = ids[n];
    T p[3];
    for (int d = 0; d < 3; ++d) {
      T x = m.template_verts(v, d);
      const double* dirs = &m.shape_dirs[(static_cast<std::size_t>(v) * 3 + d) * nb];
      for (int b = 0; b < nb; ++b) x += dirs[b] * beta[b];
      p[d] = x;
    }
    T acc[3] = {t[0], t[1], t[2]};
    for (std::size_t e = m.skin_offsets[v]; e < m.skin_offsets[v + 1]; ++e) {
      const auto& entry = m.skin_entries[e];
      const auto& r = s.rot[entry.joint];
      const auto& o = s.offset[entry.joint];
      for (int d = 0; d < 3; ++d)
        acc[d] += entry.weight * (r[d * 3] * p[0] + r[d * 3 + 1] * p[1] + r[d * 3 + 2] * p[2] + o[d]);
    }
    for (int d = 0; d < 3; ++d) out[3 * n + d] = acc[d];
  }
}

}  // namespace lbs

}  // namespace meshtri
