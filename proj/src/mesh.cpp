// SPDX-License-Identifier: Apache-2.0
#include "meshtri/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace meshtri {

void TriMesh::validate() const {
  const int nv = num_vertices();
  for (int f = 0; f < num_faces(); ++f) {
    const int a = faces(f, 0), b = faces(f, 1), c = faces(f, 2);
    if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
      throw Error(ErrorCode::InvariantViolation, "face " + std::to_string(f) + " has an out-of-range index");
    if (a == b || b == c || a == c)
      throw Error(ErrorCode::InvariantViolation, "face " + std::to_string(f) + " repeats a vertex");
  }
}

SubsamplingOperator SubsamplingOperator::identity(int v) {
  SubsamplingOperator op;
  op.source_v = v;
  op.kept_indices.resize(static_cast<std::size_t>(v));
  for (int i = 0; i < v; ++i) op.kept_indices[i] = i;
  return op;
}

void SubsamplingOperator::validate() const {
  if (source_v < 0) throw Error(ErrorCode::InvariantViolation, "negative source_V");
  if (size() > source_v) throw Error(ErrorCode::InvariantViolation, "more kept indices than source vertices");
  for (std::size_t n = 0; n < kept_indices.size(); ++n) {
    if (kept_indices[n] < 0 || kept_indices[n] >= source_v)
      throw Error(ErrorCode::InvariantViolation, "kept index out of range at position " + std::to_string(n));
    if (n > 0 && kept_indices[n] <= kept_indices[n - 1])
      throw Error(ErrorCode::InvariantViolation, "kept indices must be strictly increasing");
  }
}

SubsamplingOperator SubsamplingOperator::compose(const SubsamplingOperator& inner) const {
  if (source_v != inner.size())
    throw Error(ErrorCode::DimensionMismatch, "outer operator expects " + std::to_string(source_v) + " rows");
  SubsamplingOperator op;
  op.source_v = inner.source_v;
  for (int k : kept_indices) op.kept_indices.push_back(inner.kept_indices[k]);
  return op;
}

Points apply_subsample(const SubsamplingOperator& op, const Points& verts) {
  if (verts.rows() != op.source_v)
    throw Error(ErrorCode::DimensionMismatch,
                "operator expects " + std::to_string(op.source_v) + " rows, got " + std::to_string(verts.rows()));
  Points out(op.size(), 3);
  for (int n = 0; n < op.size(); ++n) out.row(n) = verts.row(op.kept_indices[n]);
  return out;
}

VisibilityMap subsample_visibility(const VisibilityMap& full, const SubsamplingOperator& op) {
  if (static_cast<int>(full.size()) != op.source_v)
    throw Error(ErrorCode::DimensionMismatch,
                "visibility has " + std::to_string(full.size()) + " entries, operator expects " + std::to_string(op.source_v));
  VisibilityMap out;
  out.reserve(op.kept_indices.size());
  for (int k : op.kept_indices) out.push_back(full[k]);
  return out;
}

void export_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  char buf[128];
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", mesh.vertices(v, 0), mesh.vertices(v, 1), mesh.vertices(v, 2));
    out << buf;
  }
  for (int f = 0; f < mesh.num_faces(); ++f)
    out << "f " << mesh.faces(f, 0) + 1 << ' ' << mesh.faces(f, 1) + 1 << ' ' << mesh.faces(f, 2) + 1 << '\n';
}

namespace {

// Vertex reference of an OBJ face token ("7", "7/1", "7//3", "-1").
int parse_face_index(const std::string& token, int nv, int line) {
  const std::string head = token.substr(0, token.find('/'));
  std::size_t used = 0;
  int idx = 0;
  try {
    idx = std::stoi(head, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != head.size() || head.empty() || idx == 0)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": bad face index '" + token + "'");
  idx = idx > 0 ? idx - 1 : nv + idx;
  if (idx < 0 || idx >= nv)
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": face index out of range");
  return idx;
}

}  // namespace

TriMesh import_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::array<double, 3>> verts;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      std::array<double, 3> p{};
      if (!(ss >> p[0] >> p[1] >> p[2]))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": vertex needs three coordinates");
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<std::string> toks;
      std::string tok;
      while (ss >> tok) toks.push_back(tok);
      if (toks.size() != 3)
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(lineno) + ": only triangular faces are supported, got " +
                        std::to_string(toks.size()) + " vertices");
      std::array<int, 3> f{};
      for (int c = 0; c < 3; ++c) f[c] = parse_face_index(toks[c], static_cast<int>(verts.size()), lineno);
      faces.push_back(f);
    }
    // vn, vt, o, g, s, usemtl are ignored.
  }
  if (verts.empty()) throw Error(ErrorCode::ParseError, path + ": no vertices");
  TriMesh m;
  m.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t v = 0; v < verts.size(); ++v)
    for (int d = 0; d < 3; ++d) m.vertices(static_cast<Eigen::Index>(v), d) = verts[v][d];
  m.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f)
    for (int c = 0; c < 3; ++c) m.faces(static_cast<Eigen::Index>(f), c) = faces[f][c];
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return m;
}

TriMesh icosphere(int subdivisions, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                    {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& tri : f) {
      const int a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], a, c});
      next.push_back({tri[1], b, a});
      next.push_back({tri[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  TriMesh m;
  m.vertices.resize(static_cast<Eigen::Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) m.vertices.row(static_cast<Eigen::Index>(i)) = radius * v[i].transpose();
  m.faces.resize(static_cast<Eigen::Index>(f.size()), 3);
  for (std::size_t i = 0; i < f.size(); ++i)
    for (int c = 0; c < 3; ++c) m.faces(static_cast<Eigen::Index>(i), c) = f[i][c];
  return m;
}

}  // namespace meshtri
