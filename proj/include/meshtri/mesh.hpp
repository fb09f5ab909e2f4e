// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshtri/body_model.hpp"
#include "meshtri/camera.hpp"

namespace meshtri {

struct TriMesh {
  Points vertices;
  Faces faces;

  int num_vertices() const { return static_cast<int>(vertices.rows()); }
  int num_faces() const { return static_cast<int>(faces.rows()); }
  /// Throws InvariantViolation on out-of-range indices or a repeated index.
  void validate() const;
};

/// Row gather sub(·): output row n is input row kept_indices[n].
struct SubsamplingOperator {
  int source_v = 0;
  std::vector<int> kept_indices;  // strictly increasing

  int size() const { return static_cast<int>(kept_indices.size()); }
  static SubsamplingOperator identity(int v);
  void validate() const;
  /// this ∘ inner: applying `inner` first, then this operator.
  SubsamplingOperator compose(const SubsamplingOperator& inner) const;
};

using VisibilityMap = std::vector<std::uint8_t>;

Points apply_subsample(const SubsamplingOperator& op, const Points& verts);
VisibilityMap subsample_visibility(const VisibilityMap& full, const SubsamplingOperator& op);

/// Sub-vertex counts of the coarsening presets.
inline constexpr int kSubsamplePresets[] = {431, 216, 108, 54};

struct DecimateOptions {
  /// Before each collapse, scan every edge by brute force and record the
  /// minimum valid cost next to the collapse actually taken.
  bool audit = false;
};

struct DecimateResult {
  TriMesh mesh;
  SubsamplingOperator op;
  std::vector<double> collapse_costs;
  std::vector<double> audit_min_costs;  // filled when options.audit
};

/// Quadric-error edge collapse onto an endpoint until `target_n` vertices
/// remain. Deterministic; ties go to the smallest vertex index.
DecimateResult decimate(const TriMesh& mesh, int target_n, const DecimateOptions& options = {});

/// Reference O(V·F) visibility: a vertex is visible when the segment from
/// the camera center meets no triangle (other than those incident to the
/// vertex) at ray parameter t in (0, 1 - 1e-6).
VisibilityMap visibility_bruteforce(const TriMesh& mesh, const CameraCalib& calib);
/// Same predicate accelerated with a bounding-volume hierarchy.
VisibilityMap visibility(const TriMesh& mesh, const CameraCalib& calib);

/// Triangle-only Wavefront OBJ, coordinates written with 9 significant digits.
void export_obj(const TriMesh& mesh, const std::string& path);
TriMesh import_obj(const std::string& path);

TriMesh icosphere(int subdivisions, double radius = 1.0);

}  // namespace meshtri
