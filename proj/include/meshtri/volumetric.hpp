// SPDX-License-Identifier: Apache-2.0
//
// Volumetric features and heatmaps over a VoxelGrid: unprojection,
// multi-view softmax aggregation, per-channel normalization, soft-argmax
// decoding and the synthetic Gaussian heatmap renderer.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "meshtri/camera.hpp"

namespace meshtri {

/// L³ x K values, channel-last: values[flat * K + c], flat = (i·L + j)·L + k.
/// Used both for feature volumes and for N-channel 3D heatmaps.
struct Volume {
  VoxelGrid grid;
  int channels = 0;
  std::vector<double> values;

  Volume() = default;
  Volume(const VoxelGrid& g, int k) : grid(g), channels(k), values(g.voxel_count() * std::size_t(k), 0.0) {}

  std::size_t voxels() const { return grid.voxel_count(); }
  double& at(std::size_t flat, int c) { return values[flat * channels + c]; }
  double at(std::size_t flat, int c) const { return values[flat * channels + c]; }
};

struct Unprojection {
  Volume volume;
  /// Voxels with non-positive depth; their features are zero.
  std::size_t behind_camera = 0;
};

Unprojection unproject(const FeatureMap& fmap, const VoxelGrid& grid, const CameraCalib& calib);

struct Aggregation {
  Volume aggregate;
  std::vector<Volume> weights;  // one per view, same shape as the inputs
};

Aggregation aggregate_softmax(const std::vector<Volume>& volumes);
/// `gates` are single-channel volumes with values in [0, 1]. Where every
/// gate is zero the plain softmax weights are used.
Aggregation aggregate_visibility_gated(const std::vector<Volume>& volumes, const std::vector<Volume>& gates);

/// Per-channel softmax over all voxels.
Volume heatmap_normalize(const Volume& logits);

/// N x 3 expectations of the voxel centers. Throws NotNormalized when a
/// channel does not sum to 1 within 1e-6.
Points soft_argmax(const Volume& hnorm);

/// Gradient of a scalar loss with respect to the raw logits of
/// soft_argmax(heatmap_normalize(logits)), given dLoss/dM.
Volume soft_argmax_backward(const Volume& hnorm, const Points& m, const Points& grad_m);

/// (1/N) Σ_n ‖M_n − M*_n‖₁.
double vertex_l1_loss(const Points& m, const Points& target);
/// Subgradient with sign(0) = 0.
Points vertex_l1_loss_grad(const Points& m, const Points& target);

/// Log-Gaussian scores −‖r − v_n‖² / (2σ²), one channel per vertex.
Volume render_gaussian_heatmaps(const Points& verts, const VoxelGrid& grid, double sigma);

/// Mean over channels of each view's weight at one voxel.
std::vector<double> confidence_profile(const std::vector<Volume>& weights, std::size_t voxel);

/// Storage for an L³ x N float32 heatmap.
inline std::size_t heatmap_bytes(int resolution, int vertices) {
  return std::size_t(resolution) * resolution * resolution * std::size_t(vertices) * 4;
}
inline double heatmap_megabytes(int resolution, int vertices) {
  return static_cast<double>(heatmap_bytes(resolution, vertices)) / 1e6;
}

/// Raw little-endian float32 blob plus a JSON sidecar `<path>.json`
/// holding {shape, grid}.
void save_volume(const Volume& vol, const std::string& path);
Volume load_volume(const std::string& path);

}  // namespace meshtri
