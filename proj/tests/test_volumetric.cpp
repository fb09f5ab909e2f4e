// SPDX-License-Identifier: Apache-2.0
#include <cstdio>

#include "doctest.h"
#include "meshtri/volumetric.hpp"
#include "support.hpp"

using namespace meshtri;
using meshtri::testing::uniform;

namespace {

Volume random_volume(std::mt19937_64& rng, const VoxelGrid& g, int k, double scale = 1.0) {
  Volume v(g, k);
  for (double& x : v.values) x = uniform(rng, -scale, scale);
  return v;
}

Volume constant_volume(const VoxelGrid& g, int k, double c) {
  Volume v(g, k);
  std::fill(v.values.begin(), v.values.end(), c);
  return v;
}

double channel_sum(const Volume& v, int c) {
  double s = 0.0;
  for (std::size_t f = 0; f < v.voxels(); ++f) s += v.at(f, c);
  return s;
}

}  // namespace

TEST_CASE("unproject a constant map fills every in-view voxel") {
  const CameraCalib cam = look_at_camera({0, 0, -6}, {0, 0, 0}, 1000, 400, 400);
  FeatureMap f(400, 400, 2);
  std::fill(f.values.begin(), f.values.end(), 2.5);
  const Unprojection u = unproject(f, make_cuboid({0, 0, 0}, 1.0, 6), cam);
  CHECK(u.behind_camera == 0);
  for (double v : u.volume.values) CHECK(std::abs(v - 2.5) < 1e-12);
}

TEST_CASE("unproject a single bright pixel lights only nearby voxels") {
  const CameraCalib cam = look_at_camera({0.3, 0.2, -5}, {0, 0, 0}, 800, 300, 300);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 10);
  FeatureMap f(300, 300, 1);
  f.at(150, 140, 0) = 1.0;
  const Unprojection u = unproject(f, g, cam);
  const Pixels p = project_grid(cam, g);
  int lit = 0;
  for (std::size_t v = 0; v < g.voxel_count(); ++v) {
    const auto r = static_cast<Eigen::Index>(v);
    const bool near = std::abs(p(r, 0) - 140) < 1 && std::abs(p(r, 1) - 150) < 1;
    if (u.volume.at(v, 0) != 0.0) {
      ++lit;
      CHECK(near);
    }
  }
  CHECK(lit >= 0);
}

TEST_CASE("unproject with the camera facing away yields zeros and a full diagnostic count") {
  const CameraCalib cam = look_at_camera({0, 0, -5}, {0, 0, -10}, 800, 300, 300);
  FeatureMap f(300, 300, 1);
  std::fill(f.values.begin(), f.values.end(), 1.0);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 5);
  const Unprojection u = unproject(f, g, cam);
  CHECK(u.behind_camera == g.voxel_count());
  for (double v : u.volume.values) CHECK(v == 0.0);
}

TEST_CASE("aggregate_softmax examples") {
  std::mt19937_64 rng(31);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 3);
  const Volume a = random_volume(rng, g, 2);

  const Aggregation one = aggregate_softmax({a});
  CHECK(one.aggregate.values == a.values);
  for (double w : one.weights[0].values) CHECK(w == 1.0);

  const Aggregation three = aggregate_softmax({a, a, a});
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(std::abs(three.aggregate.values[i] - a.values[i]) < 1e-12);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(three.weights[c].values[i] - 1.0 / 3.0) < 1e-12);
  }

  const Aggregation two = aggregate_softmax({constant_volume(g, 1, 0.0), constant_volume(g, 1, std::log(3.0))});
  CHECK(std::abs(two.weights[0].values[0] - 0.25) < 1e-12);
  CHECK(std::abs(two.weights[1].values[0] - 0.75) < 1e-12);
  CHECK(std::abs(two.aggregate.values[0] - 0.75 * std::log(3.0)) < 1e-12);
  CHECK(std::abs(two.aggregate.values[0] - 0.823959) < 1e-6);
}

TEST_CASE("aggregate_softmax errors") {
  CHECK_THROWS_AS(aggregate_softmax({}), Error);
  const Volume a(make_cuboid({0, 0, 0}, 1.0, 3), 2), b(make_cuboid({0, 0, 0}, 1.0, 3), 3);
  try {
    aggregate_softmax({a, b});
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("softmax weights sum to one and are shift covariant") {
  std::mt19937_64 rng(32);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 4);
  std::vector<Volume> views;
  for (int c = 0; c < 4; ++c) views.push_back(random_volume(rng, g, 3, 20.0));
  const Aggregation base = aggregate_softmax(views);
  std::vector<Volume> shifted = views;
  const double k = 7.25;
  for (Volume& v : shifted)
    for (double& x : v.values) x += k;
  const Aggregation moved = aggregate_softmax(shifted);
  for (std::size_t i = 0; i < views[0].values.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) {
      s += base.weights[c].values[i];
      CHECK(std::abs(moved.weights[c].values[i] - base.weights[c].values[i]) < 1e-9);
    }
    CHECK(std::abs(s - 1.0) < 1e-9);
    CHECK(std::abs(moved.aggregate.values[i] - (base.aggregate.values[i] + k)) < 1e-9);
  }
}

TEST_CASE("softmax aggregation survives large logits") {
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 2);
  const Aggregation r = aggregate_softmax({constant_volume(g, 1, 1000.0), constant_volume(g, 1, 990.0)});
  for (double v : r.aggregate.values) CHECK(std::isfinite(v));
  CHECK(r.weights[0].values[0] > 0.9999);
}

TEST_CASE("visibility-gated aggregation examples") {
  std::mt19937_64 rng(33);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 3);
  const Volume a = random_volume(rng, g, 2), b = random_volume(rng, g, 2);
  const Volume ones = constant_volume(g, 1, 1.0), zeros = constant_volume(g, 1, 0.0);

  const Aggregation plain = aggregate_softmax({a, b});
  const Aggregation gated = aggregate_visibility_gated({a, b}, {ones, ones});
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(std::abs(plain.aggregate.values[i] - gated.aggregate.values[i]) < 1e-12);

  const Aggregation drop = aggregate_visibility_gated({a, b}, {ones, zeros});
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(drop.aggregate.values[i] - a.values[i]) < 1e-12);

  const Aggregation half = aggregate_visibility_gated({a, a}, {ones, constant_volume(g, 1, 0.5)});
  CHECK(std::abs(half.weights[0].values[0] - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(half.weights[1].values[0] - 1.0 / 3.0) < 1e-12);

  const Aggregation fallback = aggregate_visibility_gated({a, b}, {zeros, zeros});
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(std::abs(fallback.aggregate.values[i] - plain.aggregate.values[i]) < 1e-12);

  try {
    aggregate_visibility_gated({a, b}, {ones, constant_volume(g, 1, 1.5)});
    FAIL("expected GateOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GateOutOfRange);
  }
}

TEST_CASE("heatmap_normalize examples") {
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 4);
  const Volume u = heatmap_normalize(constant_volume(g, 2, 3.0));
  for (double v : u.values) CHECK(std::abs(v - 1.0 / 64.0) < 1e-15);

  Volume spike(g, 1);
  spike.at(17, 0) = 50.0;
  const Volume s = heatmap_normalize(spike);
  CHECK(s.at(17, 0) >= 1.0 - 63.0 * std::exp(-50.0));

  std::mt19937_64 rng(34);
  const Volume r = heatmap_normalize(random_volume(rng, g, 5, 30.0));
  for (int c = 0; c < 5; ++c) CHECK(std::abs(channel_sum(r, c) - 1.0) < 1e-6);
}

TEST_CASE("soft_argmax examples") {
  const VoxelGrid g = make_cuboid({0.2, -0.1, 0.5}, 1.0, 4);
  const Points c = soft_argmax(heatmap_normalize(constant_volume(g, 1, 0.0)));
  CHECK((c.row(0).transpose() - g.center()).norm() < 1e-12);

  Volume one(g, 1);
  one.at(g.flat_index(1, 2, 3), 0) = 1.0;
  CHECK((soft_argmax(one).row(0).transpose() - g.coord(1, 2, 3)).norm() == 0.0);

  Volume two(g, 1);
  two.at(5, 0) = 0.25;
  two.at(40, 0) = 0.75;
  const Eigen::Vector3d expect = 0.25 * g.coord(5) + 0.75 * g.coord(40);
  CHECK((soft_argmax(two).row(0).transpose() - expect).norm() < 1e-12);

  Volume bad(g, 1);
  bad.at(0, 0) = 0.5;
  try {
    soft_argmax(bad);
    FAIL("expected NotNormalized");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNormalized);
  }
}

TEST_CASE("soft_argmax stays inside the cuboid bounds") {
  std::mt19937_64 rng(35);
  const VoxelGrid g = rotate_cuboid_yaw(make_cuboid({0, 1, 0}, 2.0, 6), 0.4);
  const auto [lo, hi] = g.bounds();
  const Points m = soft_argmax(heatmap_normalize(random_volume(rng, g, 8, 40.0)));
  for (Eigen::Index n = 0; n < m.rows(); ++n)
    for (int d = 0; d < 3; ++d) {
      CHECK(m(n, d) >= lo[d] - 1e-12);
      CHECK(m(n, d) <= hi[d] + 1e-12);
    }
}

TEST_CASE("vertex_l1_loss examples") {
  Points a(2, 3), b(2, 3);
  a << 0, 0, 0, 0, 0, 0;
  CHECK(vertex_l1_loss(a, a) == 0.0);
  b << 1, 0, 0, 0, 2, 0;
  CHECK(vertex_l1_loss(b, a) == 1.5);
  Points one(1, 3), other(1, 3);
  one << 1, 1, 1;
  other << 0, 0, 0;
  CHECK(vertex_l1_loss(one, other) == 3.0);
  try {
    vertex_l1_loss(one, a);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  const Points g = vertex_l1_loss_grad(b, a);
  CHECK(g(0, 0) == 0.5);
  CHECK(g(0, 1) == 0.0);  // sign(0) = 0
  CHECK(g(1, 1) == 0.5);
}

TEST_CASE("soft_argmax gradient matches central differences on an 8^3 grid") {
  std::mt19937_64 rng(36);
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 8);
  const Volume logits = random_volume(rng, g, 2, 2.0);
  Points w(2, 3);
  for (Eigen::Index i = 0; i < 6; ++i) w.data()[i] = uniform(rng, -1, 1);
  auto loss = [&](const std::vector<double>& x) {
    Volume v = logits;
    v.values = x;
    return soft_argmax(heatmap_normalize(v)).cwiseProduct(w).sum();
  };
  const Volume h = heatmap_normalize(logits);
  const Volume grad = soft_argmax_backward(h, soft_argmax(h), w);
  std::uniform_int_distribution<std::size_t> pick(0, logits.values.size() - 1);
  for (int n = 0; n < 20; ++n) {
    const std::size_t i = pick(rng);
    const double num = meshtri::testing::central_difference(loss, logits.values, i, 1e-5);
    CHECK(meshtri::testing::relative_error(grad.values[i], num, 1e-9) < 1e-4);
  }
}

TEST_CASE("vertex_l1_loss gradient matches central differences") {
  std::mt19937_64 rng(37);
  Points m(5, 3), t(5, 3);
  for (Eigen::Index i = 0; i < 15; ++i) {
    m.data()[i] = uniform(rng, -1, 1);
    t.data()[i] = uniform(rng, -1, 1);
  }
  const Points g = vertex_l1_loss_grad(m, t);
  auto loss = [&](const std::vector<double>& x) {
    Points p = m;
    std::copy(x.begin(), x.end(), p.data());
    return vertex_l1_loss(p, t);
  };
  const std::vector<double> x(m.data(), m.data() + 15);
  for (std::size_t i = 0; i < 15; ++i)
    CHECK(meshtri::testing::relative_error(g.data()[i], meshtri::testing::central_difference(loss, x, i, 1e-6)) <
          1e-4);
}

TEST_CASE("Gaussian heatmaps recover vertices") {
  const VoxelGrid g = make_cuboid({0, 0, 0}, 2.0, 32);
  Points v(3, 3);
  v.row(0) = g.coord(16, 10, 20).transpose();
  v.row(1) << 0.123, -0.321, 0.2;
  v.row(2) = v.row(1);
  const Volume h = render_gaussian_heatmaps(v, g, g.pitch());
  const Points m = soft_argmax(heatmap_normalize(h));
  CHECK((m.row(0) - v.row(0)).norm() < 1e-6);
  CHECK((m.row(1) - v.row(1)).norm() < 0.5 * g.pitch());
  for (std::size_t f = 0; f < h.voxels(); ++f) CHECK(h.at(f, 1) == h.at(f, 2));

  Points far(1, 3);
  far << 10, 0.01, 0.02;
  const Volume hf = render_gaussian_heatmaps(far, g, g.pitch());
  std::size_t best = 0;
  for (std::size_t f = 1; f < hf.voxels(); ++f)
    if (hf.at(f, 0) > hf.at(best, 0)) best = f;
  CHECK(best / (32 * 32) == 31);  // i indexes x

  try {
    render_gaussian_heatmaps(v, g, 0.0);
    FAIL("expected InvalidSigma");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSigma);
  }
}

TEST_CASE("render, normalize and soft_argmax round trip on random interior vertices") {
  std::mt19937_64 rng(38);
  const VoxelGrid g = make_cuboid({0, 1, 0}, 2.0, 32);
  const double sigma = 1.5 * g.pitch();
  Points v(50, 3);
  for (Eigen::Index n = 0; n < 50; ++n)
    for (int d = 0; d < 3; ++d) v(n, d) = g.center()[d] + uniform(rng, -1.0 + 3 * sigma, 1.0 - 3 * sigma);
  const Points m = soft_argmax(heatmap_normalize(render_gaussian_heatmaps(v, g, sigma)));
  CHECK((m - v).rowwise().norm().maxCoeff() < 0.5 * g.pitch());
}

TEST_CASE("confidence_profile examples") {
  const VoxelGrid g = make_cuboid({0, 0, 0}, 1.0, 2);
  Volume w0(g, 2), w1(g, 2);
  w0.at(3, 0) = 0.25;
  w0.at(3, 1) = 0.75;
  w1.at(3, 0) = 0.75;
  w1.at(3, 1) = 0.25;
  const auto p = confidence_profile({w0, w1}, 3);
  CHECK(p[0] == 0.5);
  CHECK(p[1] == 0.5);

  const auto u = confidence_profile(aggregate_softmax({Volume(g, 3), Volume(g, 3), Volume(g, 3)}).weights, 0);
  for (double d : u) CHECK(std::abs(d - 1.0 / 3.0) < 1e-12);

  std::mt19937_64 rng(39);
  const Volume a = random_volume(rng, g, 3), b = random_volume(rng, g, 3);
  const auto gated = aggregate_visibility_gated({a, b}, {constant_volume(g, 1, 1.0), constant_volume(g, 1, 0.0)});
  const auto z = confidence_profile(gated.weights, 5);
  CHECK(z[1] == 0.0);
  CHECK(std::abs(z[0] + z[1] - 1.0) < 1e-9);

  try {
    confidence_profile({w0, w1}, 8);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndexOutOfRange);
  }
}

TEST_CASE("heatmap memory accounting") {
  CHECK(heatmap_bytes(64, 108) == 113246208u);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", heatmap_megabytes(16, 6890));
  CHECK(std::string(buf) == "112.9");
  std::snprintf(buf, sizeof buf, "%.1f", heatmap_megabytes(64, 108));
  CHECK(std::string(buf) == "113.2");
}

TEST_CASE("volume save and load round trip in float32") {
  std::mt19937_64 rng(40);
  const Volume v = random_volume(rng, rotate_cuboid_yaw(make_cuboid({0.1, 0.9, -0.2}, 1.7, 5), 0.3), 3);
  meshtri::testing::TempDir dir("vol");
  save_volume(v, dir.file("v.bin"));
  const Volume back = load_volume(dir.file("v.bin"));
  CHECK(back.channels == 3);
  CHECK(back.grid.resolution() == 5);
  CHECK(back.grid.yaw() == doctest::Approx(0.3));
  for (std::size_t i = 0; i < v.values.size(); ++i)
    CHECK(back.values[i] == static_cast<double>(static_cast<float>(v.values[i])));
  for (std::size_t f = 0; f < v.voxels(); ++f) CHECK((back.grid.coord(f) - v.grid.coord(f)).norm() < 1e-12);
}
