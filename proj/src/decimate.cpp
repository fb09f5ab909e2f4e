// SPDX-License-Identifier: Apache-2.0
//
// Garland–Heckbert quadric edge collapse restricted to endpoint placement,
// so the surviving vertices are a subset of the input and sub(·) is a gather.
#include <algorithm>
#include <array>
#include <limits>
#include <queue>

#include <Eigen/Geometry>

#include "meshtri/mesh.hpp"

namespace meshtri {

namespace {

using Quadric = Eigen::Matrix4d;

struct Candidate {
  double cost;
  int lo, hi;    // edge endpoints, lo < hi
  int remove, keep;
  std::uint32_t stamp_lo, stamp_hi;

  // Min-heap order: cost, then smallest vertex indices.
  bool operator>(const Candidate& o) const {
    if (cost != o.cost) return cost > o.cost;
    if (lo != o.lo) return lo > o.lo;
    if (hi != o.hi) return hi > o.hi;
    return keep > o.keep;
  }
};

class Collapser {
 public:
  explicit Collapser(const TriMesh& mesh) : pos_(mesh.vertices) {
    const int nv = mesh.num_vertices();
    quadric_.assign(static_cast<std::size_t>(nv), Quadric::Zero());
    faces_of_.resize(static_cast<std::size_t>(nv));
    removed_.assign(static_cast<std::size_t>(nv), false);
    stamp_.assign(static_cast<std::size_t>(nv), 0);
    for (int f = 0; f < mesh.num_faces(); ++f) {
      faces_.push_back({mesh.faces(f, 0), mesh.faces(f, 1), mesh.faces(f, 2)});
      face_alive_.push_back(true);
      for (int c = 0; c < 3; ++c) faces_of_[faces_.back()[c]].push_back(f);
      const Eigen::Vector3d p0 = point(faces_.back()[0]);
      const Eigen::Vector3d n = (point(faces_.back()[1]) - p0).cross(point(faces_.back()[2]) - p0);
      const double len = n.norm();
      if (len == 0.0) continue;
      Eigen::Vector4d plane;
      plane << n / len, -n.dot(p0) / len;
      const Quadric k = plane * plane.transpose();
      for (int c = 0; c < 3; ++c) quadric_[faces_.back()[c]] += k;
    }
    alive_count_ = nv;
  }

  int alive() const { return alive_count_; }
  bool strict() const { return strict_; }

  void push_all() {
    for (int v = 0; v < static_cast<int>(removed_.size()); ++v)
      if (!removed_[v]) push_edges_of(v);
  }

  void relax() {
    strict_ = false;
    heap_ = {};
    push_all();
  }

  bool empty() const { return heap_.empty(); }

  // Pops until a valid collapse is found; returns false when the heap runs dry.
  bool pop_valid(Candidate& out) {
    while (!heap_.empty()) {
      Candidate c = heap_.top();
      heap_.pop();
      if (removed_[c.lo] || removed_[c.hi] || stamp_[c.lo] != c.stamp_lo || stamp_[c.hi] != c.stamp_hi) continue;
      if (!valid(c.remove, c.keep)) continue;
      out = c;
      return true;
    }
    return false;
  }

  // Brute-force minimum cost over all valid directed collapses.
  double audit_min() const {
    double best = std::numeric_limits<double>::infinity();
    for (int v = 0; v < static_cast<int>(removed_.size()); ++v) {
      if (removed_[v]) continue;
      for (int w : neighbors(v))
        if (valid(v, w)) best = std::min(best, cost(v, w));
    }
    return best;
  }

  void collapse(int u, int v) {
    for (int f : faces_of_[u]) {
      if (!face_alive_[f]) continue;
      auto& tri = faces_[f];
      if (tri[0] == v || tri[1] == v || tri[2] == v) {
        face_alive_[f] = false;
        continue;
      }
      for (int& idx : tri)
        if (idx == u) idx = v;
      faces_of_[v].push_back(f);
    }
    faces_of_[u].clear();
    removed_[u] = true;
    --alive_count_;
    quadric_[v] += quadric_[u];
    compact(v);
    std::vector<int> ring = neighbors(v);
    ++stamp_[v];
    for (int w : ring) {
      compact(w);
      ++stamp_[w];
    }
    push_edges_of(v);
    for (int w : ring) push_edges_of(w);
  }

  std::vector<std::array<int, 3>> alive_faces() const {
    std::vector<std::array<int, 3>> out;
    for (std::size_t f = 0; f < faces_.size(); ++f)
      if (face_alive_[f]) out.push_back(faces_[f]);
    return out;
  }
  const std::vector<bool>& removed() const { return removed_; }

 private:
  Eigen::Vector3d point(int v) const { return pos_.row(v).transpose(); }

  void compact(int v) {
    auto& fl = faces_of_[v];
    fl.erase(std::remove_if(fl.begin(), fl.end(), [&](int f) { return !face_alive_[f]; }), fl.end());
  }

  std::vector<int> neighbors(int v) const {
    std::vector<int> n;
    for (int f : faces_of_[v]) {
      if (!face_alive_[f]) continue;
      for (int idx : faces_[f])
        if (idx != v) n.push_back(idx);
    }
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    return n;
  }

  double cost(int remove, int keep) const {
    Eigen::Vector4d x;
    x << point(keep), 1.0;
    return std::max(0.0, x.dot((quadric_[remove] + quadric_[keep]) * x));
  }

  void push_edges_of(int v) {
    for (int w : neighbors(v)) {
      const int lo = std::min(v, w), hi = std::max(v, w);
      heap_.push({cost(v, w), lo, hi, v, w, stamp_[lo], stamp_[hi]});
      heap_.push({cost(w, v), lo, hi, w, v, stamp_[lo], stamp_[hi]});
    }
  }

  bool has_vertex(int f, int v) const {
    const auto& t = faces_[f];
    return t[0] == v || t[1] == v || t[2] == v;
  }

  bool valid(int u, int v) const {
    // Link condition: the common neighbors of u and v are exactly the apexes
    // of the faces sharing edge uv.
    const auto nu = neighbors(u), nv = neighbors(v);
    std::vector<int> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
    std::vector<int> apex;
    for (int f : faces_of_[u])
      if (face_alive_[f] && has_vertex(f, v))
        for (int idx : faces_[f])
          if (idx != u && idx != v) apex.push_back(idx);
    std::sort(apex.begin(), apex.end());
    if (apex.empty() || common != apex) return false;

    // Every apex keeps at least one face, and v keeps at least one face.
    for (int w : apex) {
      int left = 0;
      for (int f : faces_of_[w])
        if (face_alive_[f] && !(has_vertex(f, u) && has_vertex(f, v))) ++left;
      if (left == 0) return false;
    }
    int survivors = 0;
    for (int f : faces_of_[u])
      if (face_alive_[f] && !has_vertex(f, v)) ++survivors;
    for (int f : faces_of_[v])
      if (face_alive_[f] && !has_vertex(f, u)) ++survivors;
    if (survivors == 0) return false;

    // No rewired face may duplicate an existing face of v.
    for (int f : faces_of_[u]) {
      if (!face_alive_[f] || has_vertex(f, v)) continue;
      std::array<int, 3> t = faces_[f];
      for (int& idx : t)
        if (idx == u) idx = v;
      std::sort(t.begin(), t.end());
      for (int g : faces_of_[v]) {
        if (!face_alive_[g] || has_vertex(g, u)) continue;
        std::array<int, 3> s = faces_[g];
        std::sort(s.begin(), s.end());
        if (s == t) return false;
      }
    }

    if (strict_) {
      for (int f : faces_of_[u]) {
        if (!face_alive_[f] || has_vertex(f, v)) continue;
        const auto& t = faces_[f];
        std::array<Eigen::Vector3d, 3> p{point(t[0]), point(t[1]), point(t[2])};
        const Eigen::Vector3d n0 = (p[1] - p[0]).cross(p[2] - p[0]);
        for (int c = 0; c < 3; ++c)
          if (t[c] == u) p[c] = point(v);
        const Eigen::Vector3d n1 = (p[1] - p[0]).cross(p[2] - p[0]);
        if (n1.norm() <= 1e-12 * (1.0 + n0.norm())) return false;
        if (n0.dot(n1) <= 0.0) return false;
      }
    }
    return true;
  }

  const Points& pos_;
  std::vector<Quadric> quadric_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<bool> face_alive_;
  std::vector<std::vector<int>> faces_of_;
  std::vector<bool> removed_;
  std::vector<std::uint32_t> stamp_;
  std::priority_queue<Candidate, std::vector<Candidate>, std::greater<>> heap_;
  int alive_count_ = 0;
  bool strict_ = true;
};

}  // namespace

DecimateResult decimate(const TriMesh& mesh, int target_n, const DecimateOptions& options) {
  mesh.validate();
  const int nv = mesh.num_vertices();
  if (target_n < 4 || target_n > nv)
    throw Error(ErrorCode::InvalidArgument,
                "target_n must lie in [4, " + std::to_string(nv) + "], got " + std::to_string(target_n));
  DecimateResult result;
  Collapser c(mesh);
  c.push_all();
  while (c.alive() > target_n) {
    Candidate cand;
    if (!c.pop_valid(cand)) {
      if (c.strict()) {
        c.relax();
        continue;
      }
      throw Error(ErrorCode::TargetTooSmall, "no valid collapse left at " + std::to_string(c.alive()) +
                                                 " vertices; target " + std::to_string(target_n));
    }
    if (options.audit) result.audit_min_costs.push_back(c.audit_min());
    result.collapse_costs.push_back(cand.cost);
    c.collapse(cand.remove, cand.keep);
  }

  std::vector<int> remap(static_cast<std::size_t>(nv), -1);
  result.op.source_v = nv;
  for (int v = 0; v < nv; ++v)
    if (!c.removed()[v]) {
      remap[v] = result.op.size();
      result.op.kept_indices.push_back(v);
    }
  result.mesh.vertices = apply_subsample(result.op, mesh.vertices);
  const auto faces = c.alive_faces();
  result.mesh.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int k = 0; k < 3; ++k) result.mesh.faces(static_cast<Eigen::Index>(f), k) = remap[faces[f][k]];
  return result;
}

}  // namespace meshtri
