// SPDX-License-Identifier: Apache-2.0
#include "meshtri/volumetric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace meshtri {

namespace {

void check_same_shape(const Volume& a, const Volume& b, const char* what) {
  if (a.channels != b.channels || a.grid.resolution() != b.grid.resolution() || a.values.size() != b.values.size())
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": volume shapes differ");
  if (a.grid.center() != b.grid.center() || a.grid.side() != b.grid.side() || a.grid.yaw() != b.grid.yaw())
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": volumes live on different grids");
}

// Weighted softmax across views at every element; gate == nullptr means all ones.
Aggregation aggregate(const std::vector<Volume>& volumes, const std::vector<Volume>* gates) {
  if (volumes.empty()) throw Error(ErrorCode::EmptyViewList, "aggregation needs at least one view");
  for (std::size_t c = 1; c < volumes.size(); ++c) check_same_shape(volumes[0], volumes[c], "aggregate");
  const std::size_t nc = volumes.size();
  const int k = volumes[0].channels;
  const std::size_t nvox = volumes[0].voxels();
  Aggregation out;
  out.aggregate = Volume(volumes[0].grid, k);
  out.weights.assign(nc, Volume(volumes[0].grid, k));
  std::vector<double> e(nc);
  for (std::size_t f = 0; f < nvox; ++f) {
    for (int ch = 0; ch < k; ++ch) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < nc; ++c) mx = std::max(mx, volumes[c].at(f, ch));
      double sum = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        e[c] = std::exp(volumes[c].at(f, ch) - mx);
        if (gates) e[c] *= (*gates)[c].values[f];
        sum += e[c];
      }
      if (sum == 0.0) {
        for (std::size_t c = 0; c < nc; ++c) sum += e[c] = std::exp(volumes[c].at(f, ch) - mx);
      }
      double agg = 0.0;
      for (std::size_t c = 0; c < nc; ++c) {
        const double w = e[c] / sum;
        out.weights[c].at(f, ch) = w;
        agg += w * volumes[c].at(f, ch);
      }
      out.aggregate.at(f, ch) = agg;
    }
  }
  return out;
}

}  // namespace

Unprojection unproject(const FeatureMap& fmap, const VoxelGrid& grid, const CameraCalib& calib) {
  Unprojection out;
  out.volume = Volume(grid, fmap.channels);
  for (std::size_t f = 0; f < grid.voxel_count(); ++f) {
    const Eigen::Vector3d p = grid.coord(f);
    if (!(calib.depth(p) > 1e-9)) {
      ++out.behind_camera;
      continue;
    }
    const Eigen::Vector2d px = project_point(calib, p);
    bilinear_sample_into(fmap, px.x(), px.y(), &out.volume.values[f * fmap.channels]);
  }
  return out;
}

Aggregation aggregate_softmax(const std::vector<Volume>& volumes) { return aggregate(volumes, nullptr); }

Aggregation aggregate_visibility_gated(const std::vector<Volume>& volumes, const std::vector<Volume>& gates) {
  if (volumes.empty()) throw Error(ErrorCode::EmptyViewList, "aggregation needs at least one view");
  if (gates.size() != volumes.size())
    throw Error(ErrorCode::ShapeMismatch, "got " + std::to_string(gates.size()) + " gates for " +
                                              std::to_string(volumes.size()) + " views");
  for (const auto& g : gates) {
    if (g.channels != 1 || g.voxels() != volumes[0].voxels() || g.values.size() != g.voxels())
      throw Error(ErrorCode::ShapeMismatch, "gates must be single-channel volumes on the feature grid");
    for (double v : g.values)
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::GateOutOfRange, "gate value " + std::to_string(v));
  }
  return aggregate(volumes, &gates);
}

Volume heatmap_normalize(const Volume& logits) {
  const int n = logits.channels;
  const std::size_t nvox = logits.voxels();
  Volume out(logits.grid, n);
  const double* x = logits.values.data();
  double* y = out.values.data();
  std::vector<double> mx(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  for (std::size_t f = 0; f < nvox; ++f, x += n)
    for (int c = 0; c < n; ++c) mx[c] = std::max(mx[c], x[c]);
  std::vector<double> sum(static_cast<std::size_t>(n), 0.0);
  x = logits.values.data();
  for (std::size_t f = 0; f < nvox; ++f, x += n, y += n)
    for (int c = 0; c < n; ++c) sum[c] += y[c] = std::exp(x[c] - mx[c]);
  for (double& s : sum) s = 1.0 / s;
  y = out.values.data();
  for (std::size_t f = 0; f < nvox; ++f, y += n)
    for (int c = 0; c < n; ++c) y[c] *= sum[c];
  return out;
}

Points soft_argmax(const Volume& hnorm) {
  const int n = hnorm.channels;
  const std::size_t nvox = hnorm.voxels();
  std::vector<double> acc(4 * static_cast<std::size_t>(n), 0.0);
  const double* r = hnorm.grid.coords().data();
  const double* p = hnorm.values.data();
  for (std::size_t f = 0; f < nvox; ++f, r += 3, p += n)
    for (int c = 0; c < n; ++c) {
      double* a = &acc[4 * static_cast<std::size_t>(c)];
      a[0] += p[c];
      a[1] += p[c] * r[0];
      a[2] += p[c] * r[1];
      a[3] += p[c] * r[2];
    }
  Points m(n, 3);
  for (int c = 0; c < n; ++c) {
    const double* a = &acc[4 * static_cast<std::size_t>(c)];
    if (!(std::abs(a[0] - 1.0) <= 1e-6))
      throw Error(ErrorCode::NotNormalized, "channel " + std::to_string(c) + " sums to " + std::to_string(a[0]));
    m.row(c) << a[1], a[2], a[3];
  }
  return m;
}

Volume soft_argmax_backward(const Volume& hnorm, const Points& m, const Points& grad_m) {
  const int n = hnorm.channels;
  if (m.rows() != n || grad_m.rows() != n)
    throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(n) + " coordinate rows");
  Volume g(hnorm.grid, n);
  const auto& r = hnorm.grid.coords();
  for (std::size_t f = 0; f < hnorm.voxels(); ++f)
    for (int c = 0; c < n; ++c) {
      const double dot = grad_m(c, 0) * (r[3 * f] - m(c, 0)) + grad_m(c, 1) * (r[3 * f + 1] - m(c, 1)) +
                         grad_m(c, 2) * (r[3 * f + 2] - m(c, 2));
      g.at(f, c) = hnorm.at(f, c) * dot;
    }
  return g;
}

double vertex_l1_loss(const Points& m, const Points& target) {
  if (m.rows() != target.rows())
    throw Error(ErrorCode::ShapeMismatch, std::to_string(m.rows()) + " vs " + std::to_string(target.rows()) + " rows");
  if (m.rows() == 0) return 0.0;
  return (m - target).cwiseAbs().sum() / static_cast<double>(m.rows());
}

Points vertex_l1_loss_grad(const Points& m, const Points& target) {
  if (m.rows() != target.rows())
    throw Error(ErrorCode::ShapeMismatch, std::to_string(m.rows()) + " vs " + std::to_string(target.rows()) + " rows");
  Points g(m.rows(), 3);
  const double inv = m.rows() ? 1.0 / static_cast<double>(m.rows()) : 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (int d = 0; d < 3; ++d) {
      const double diff = m(i, d) - target(i, d);
      g(i, d) = diff > 0.0 ? inv : (diff < 0.0 ? -inv : 0.0);
    }
  return g;
}

Volume render_gaussian_heatmaps(const Points& verts, const VoxelGrid& grid, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidSigma, "sigma must be positive");
  const int n = static_cast<int>(verts.rows());
  Volume out(grid, n);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> v(3 * static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c)
    for (int d = 0; d < 3; ++d) v[3 * static_cast<std::size_t>(c) + d] = verts(c, d);
  const double* r = grid.coords().data();
  double* y = out.values.data();
  for (std::size_t f = 0; f < grid.voxel_count(); ++f, r += 3, y += n)
    for (int c = 0; c < n; ++c) {
      const double* q = &v[3 * static_cast<std::size_t>(c)];
      const double dx = r[0] - q[0], dy = r[1] - q[1], dz = r[2] - q[2];
      y[c] = -(dx * dx + dy * dy + dz * dz) * inv;
    }
  return out;
}

std::vector<double> confidence_profile(const std::vector<Volume>& weights, std::size_t voxel) {
  std::vector<double> out;
  for (const auto& w : weights) {
    if (voxel >= w.voxels())
      throw Error(ErrorCode::IndexOutOfRange, "voxel " + std::to_string(voxel) + " outside " +
                                                  std::to_string(w.voxels()) + " voxels");
    double s = 0.0;
    for (int c = 0; c < w.channels; ++c) s += w.at(voxel, c);
    out.push_back(w.channels ? s / w.channels : 0.0);
  }
  return out;
}

void save_volume(const Volume& vol, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "volume blobs are little-endian");
  std::vector<float> data(vol.values.begin(), vol.values.end());
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  }
  const int l = vol.grid.resolution();
  const nlohmann::ordered_json side = {
      {"dtype", "<f4"},
      {"shape", {l, l, l, vol.channels}},
      {"grid",
       {{"center", {vol.grid.center().x(), vol.grid.center().y(), vol.grid.center().z()}},
        {"side", vol.grid.side()},
        {"resolution", l},
        {"yaw", vol.grid.yaw()}}}};
  std::ofstream out(path + ".json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path + ".json");
  out << side.dump(2) << "\n";
}

Volume load_volume(const std::string& path) {
  nlohmann::json side;
  {
    std::ifstream in(path + ".json");
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path + ".json");
    try {
      side = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, path + ".json: " + e.what());
    }
  }
  Volume vol;
  try {
    const auto shape = side.at("shape").get<std::vector<int>>();
    const auto& g = side.at("grid");
    const auto c = g.at("center").get<std::vector<double>>();
    if (shape.size() != 4 || c.size() != 3 || side.value("dtype", "<f4") != "<f4")
      throw Error(ErrorCode::ParseError, path + ".json: bad shape, center or dtype");
    const int l = g.at("resolution").get<int>();
    if (shape[0] != l || shape[1] != l || shape[2] != l || shape[3] < 0)
      throw Error(ErrorCode::ParseError, path + ".json: shape disagrees with grid resolution");
    VoxelGrid grid = make_cuboid({c[0], c[1], c[2]}, g.at("side").get<double>(), l);
    const double yaw = g.value("yaw", 0.0);
    if (yaw != 0.0) grid = rotate_cuboid_yaw(grid, yaw);
    vol = Volume(grid, shape[3]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ".json: " + e.what());
  }
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != vol.values.size() * sizeof(float))
    throw Error(ErrorCode::ParseError, path + ": expected " + std::to_string(vol.values.size() * sizeof(float)) +
                                           " bytes, found " + std::to_string(bytes));
  in.seekg(0);
  std::vector<float> data(vol.values.size());
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(bytes));
  std::copy(data.begin(), data.end(), vol.values.begin());
  return vol;
}

}  // namespace meshtri
