// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include <Eigen/Geometry>

#include "meshtri/mesh.hpp"

namespace meshtri {

namespace {

constexpr double kSegmentEnd = 1.0 - 1e-6;

// Möller–Trumbore restricted to the open segment parameter range.
bool segment_hits(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const Eigen::Vector3d& a,
                  const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  const Eigen::Vector3d e1 = b - a, e2 = c - a;
  const Eigen::Vector3d p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return false;
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = origin - a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Eigen::Vector3d q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(q) * inv;
  return t > 0.0 && t < kSegmentEnd;
}

struct Context {
  const TriMesh& mesh;
  Eigen::Vector3d origin;

  Eigen::Vector3d vert(int v) const { return mesh.vertices.row(v).transpose(); }
  bool incident(int f, int v) const {
    return mesh.faces(f, 0) == v || mesh.faces(f, 1) == v || mesh.faces(f, 2) == v;
  }
  bool occluded_by(int f, int v, const Eigen::Vector3d& dir) const {
    return !incident(f, v) &&
           segment_hits(origin, dir, vert(mesh.faces(f, 0)), vert(mesh.faces(f, 1)), vert(mesh.faces(f, 2)));
  }
};

struct Node {
  Eigen::Vector3d lo, hi;
  int left = -1, right = -1;  // children, or -1 for a leaf
  int begin = 0, end = 0;     // leaf range into the triangle order
};

class Bvh {
 public:
  explicit Bvh(const TriMesh& mesh) : mesh_(mesh) {
    const int nf = mesh.num_faces();
    order_.resize(static_cast<std::size_t>(nf));
    std::iota(order_.begin(), order_.end(), 0);
    centroid_.resize(static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f)
      centroid_[f] = (vert(mesh.faces(f, 0)) + vert(mesh.faces(f, 1)) + vert(mesh.faces(f, 2))) / 3.0;
    if (nf > 0) build(0, nf);
  }

  template <class Fn>
  bool any(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, Fn&& hit) const {
    if (nodes_.empty()) return false;
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const Node& n = nodes_[stack.back()];
      stack.pop_back();
      if (!overlaps(n, origin, dir)) continue;
      if (n.left < 0) {
        for (int i = n.begin; i < n.end; ++i)
          if (hit(order_[i])) return true;
      } else {
        stack.push_back(n.right);
        stack.push_back(n.left);
      }
    }
    return false;
  }

 private:
  Eigen::Vector3d vert(int v) const { return mesh_.vertices.row(v).transpose(); }

  int build(int begin, int end) {
    Node node;
    node.lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (int i = begin; i < end; ++i)
      for (int c = 0; c < 3; ++c) {
        node.lo = node.lo.cwiseMin(vert(mesh_.faces(order_[i], c)));
        node.hi = node.hi.cwiseMax(vert(mesh_.faces(order_[i], c)));
      }
    const double pad = 1e-9 * (1.0 + (node.hi - node.lo).norm());
    node.lo.array() -= pad;
    node.hi.array() += pad;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= 4) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }
    Eigen::Vector3d clo = centroid_[order_[begin]], chi = clo;
    for (int i = begin; i < end; ++i) {
      clo = clo.cwiseMin(centroid_[order_[i]]);
      chi = chi.cwiseMax(centroid_[order_[i]]);
    }
    int axis = 0;
    (chi - clo).maxCoeff(&axis);
    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
      if (centroid_[a][axis] != centroid_[b][axis]) return centroid_[a][axis] < centroid_[b][axis];
      return a < b;
    });
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Slab test of the segment origin + t·dir, t in [0, 1], against the box.
  static bool overlaps(const Node& n, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
    double t0 = 0.0, t1 = 1.0;
    for (int a = 0; a < 3; ++a) {
      if (d[a] == 0.0) {
        if (o[a] < n.lo[a] || o[a] > n.hi[a]) return false;
        continue;
      }
      double ta = (n.lo[a] - o[a]) / d[a], tb = (n.hi[a] - o[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 > t1) return false;
    }
    return true;
  }

  const TriMesh& mesh_;
  std::vector<int> order_;
  std::vector<Eigen::Vector3d> centroid_;
  std::vector<Node> nodes_;
};

}  // namespace

VisibilityMap visibility_bruteforce(const TriMesh& mesh, const CameraCalib& calib) {
  mesh.validate();
  const Context ctx{mesh, calib.center()};
  VisibilityMap vis(static_cast<std::size_t>(mesh.num_vertices()), 0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Eigen::Vector3d dir = ctx.vert(v) - ctx.origin;
    if (dir.norm() < 1e-12) continue;
    bool blocked = false;
    for (int f = 0; f < mesh.num_faces() && !blocked; ++f) blocked = ctx.occluded_by(f, v, dir);
    vis[v] = blocked ? 0 : 1;
  }
  return vis;
}

VisibilityMap visibility(const TriMesh& mesh, const CameraCalib& calib) {
  mesh.validate();
  const Context ctx{mesh, calib.center()};
  const Bvh bvh(mesh);
  VisibilityMap vis(static_cast<std::size_t>(mesh.num_vertices()), 0);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Eigen::Vector3d dir = ctx.vert(v) - ctx.origin;
    if (dir.norm() < 1e-12) continue;
    const bool blocked = bvh.any(ctx.origin, dir, [&](int f) { return ctx.occluded_by(f, v, dir); });
    vis[v] = blocked ? 0 : 1;
  }
  return vis;
}

}  // namespace meshtri
