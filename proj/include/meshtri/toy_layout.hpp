// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

#include "meshtri/body_model.hpp"

namespace meshtri {

/// Designed skeleton of the toy humanoid for a given seed, before meshing.
/// Joint positions are relative to the pelvis, meters, +y up.
struct ToyLayout {
  std::array<Eigen::Vector3d, kNumJoints> joints;
  Eigen::Vector3d head_top;
  Eigen::Vector3d pelvis_bottom;
  std::array<Eigen::Vector3d, 2> toe;
  std::array<Eigen::Vector3d, 2> fingertip;
  double girth = 1.0;
};

ToyLayout toy_layout(std::uint64_t seed);

}  // namespace meshtri
