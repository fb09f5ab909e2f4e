// SPDX-License-Identifier: Apache-2.0
//
// Body model container: a JSON header plus a sidecar blob of little-endian
// arrays at declared byte offsets.
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "meshtri/body_model.hpp"

namespace meshtri {

static_assert(std::endian::native == std::endian::little, "model container assumes a little-endian host");

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field '") + name + "': " + e.what());
  }
}

}  // namespace

void save_model(const BodyModel& model, const std::string& path) {
  const int nv = model.num_vertices(), nj = model.num_joints(), nb = model.num_betas;
  const std::string blob_path = path + ".bin";
  std::string blob;
  json arrays = json::object();
  auto append = [&](const char* name, const char* dtype, const void* data, std::size_t bytes,
                    std::vector<std::int64_t> shape) {
    arrays[name] = {{"dtype", dtype}, {"offset", blob.size()}, {"bytes", bytes}, {"shape", shape}};
    blob.append(static_cast<const char*>(data), bytes);
  };
  append("template", "<f8", model.template_verts.data(), sizeof(double) * nv * 3, {nv, 3});
  append("faces", "<i4", model.faces.data(), sizeof(std::int32_t) * model.faces.rows() * 3, {model.faces.rows(), 3});
  append("shape_dirs", "<f8", model.shape_dirs.data(), sizeof(double) * model.shape_dirs.size(), {nv, 3, nb});
  append("skin_weights", "<f8", model.skin_weights.data(), sizeof(double) * nv * nj, {nv, nj});
  append("joint_regressor", "<f8", model.joint_regressor.data(), sizeof(double) * model.joint_regressor.size(),
         {model.joint_regressor.rows(), nv});
  append("rest_joint_regressor", "<f8", model.rest_joint_regressor.data(),
         sizeof(double) * model.rest_joint_regressor.size(), {nj, nv});

  json hinges = json::array();
  for (const auto& h : model.hinge_dofs) hinges.push_back({h.joint, h.axis, h.sign});
  json header = {{"format", "meshtri-body"},
                 {"version", 1},
                 {"V", nv},
                 {"F", model.faces.rows()},
                 {"J", nj},
                 {"B", nb},
                 {"parents", model.parents},
                 {"hinge_dofs", hinges},
                 {"wrist_joints", model.wrist_joints},
                 {"blob", std::filesystem::path(blob_path).filename().string()},
                 {"arrays", arrays}};
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << header.dump(2) << "\n";
  }
  std::ofstream out(blob_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + blob_path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

namespace {

BodyModel load_model_unchecked(const std::string& path) {
  json header;
  try {
    header = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!header.is_object()) throw Error(ErrorCode::ParseError, path + ": header is not an object");
  if (field<std::string>(header, "format") != "meshtri-body")
    throw Error(ErrorCode::ParseError, path + ": unexpected format tag");
  if (field<int>(header, "version") != 1) throw Error(ErrorCode::ParseError, path + ": unsupported version");
  const auto nv = field<std::int64_t>(header, "V");
  const auto nf = field<std::int64_t>(header, "F");
  const auto nj = field<std::int64_t>(header, "J");
  const auto nb = field<std::int64_t>(header, "B");
  if (nv <= 0 || nf < 0 || nj <= 0 || nb < 0) throw Error(ErrorCode::ParseError, path + ": invalid dimensions");

  const auto blob_name = field<std::string>(header, "blob");
  const std::string blob = read_file((std::filesystem::path(path).parent_path() / blob_name).string());
  const json arrays = field<json>(header, "arrays");

  auto fetch = [&](const char* name, const char* dtype, std::vector<std::int64_t> shape, void* dst, std::size_t elem) {
    if (!arrays.contains(name)) throw Error(ErrorCode::ParseError, std::string("arrays.") + name + " missing");
    const json& a = arrays.at(name);
    const auto got_dtype = field<std::string>(a, "dtype");
    const auto offset = field<std::uint64_t>(a, "offset");
    const auto bytes = field<std::uint64_t>(a, "bytes");
    const auto got_shape = field<std::vector<std::int64_t>>(a, "shape");
    if (got_dtype != dtype) throw Error(ErrorCode::ParseError, std::string("arrays.") + name + ": dtype " + got_dtype);
    if (got_shape != shape) throw Error(ErrorCode::ParseError, std::string("arrays.") + name + ": shape mismatch");
    std::uint64_t count = 1;
    for (auto s : shape) count *= static_cast<std::uint64_t>(s);
    if (bytes != count * elem) throw Error(ErrorCode::ParseError, std::string("arrays.") + name + ": byte count");
    if (offset + bytes > blob.size())
      throw Error(ErrorCode::ParseError, std::string("arrays.") + name + ": blob truncated at byte " +
                                             std::to_string(blob.size()));
    std::memcpy(dst, blob.data() + offset, bytes);
  };

  BodyModel m;
  m.num_betas = static_cast<int>(nb);
  m.template_verts.resize(nv, 3);
  fetch("template", "<f8", {nv, 3}, m.template_verts.data(), sizeof(double));
  m.faces.resize(nf, 3);
  fetch("faces", "<i4", {nf, 3}, m.faces.data(), sizeof(std::int32_t));
  m.shape_dirs.resize(static_cast<std::size_t>(nv * 3 * nb));
  fetch("shape_dirs", "<f8", {nv, 3, nb}, m.shape_dirs.data(), sizeof(double));
  m.skin_weights.resize(nv, nj);
  fetch("skin_weights", "<f8", {nv, nj}, m.skin_weights.data(), sizeof(double));
  m.joint_regressor.resize(kNumRegressedJoints, nv);
  fetch("joint_regressor", "<f8", {kNumRegressedJoints, nv}, m.joint_regressor.data(), sizeof(double));
  m.rest_joint_regressor.resize(nj, nv);
  fetch("rest_joint_regressor", "<f8", {nj, nv}, m.rest_joint_regressor.data(), sizeof(double));

  m.parents = field<std::vector<int>>(header, "parents");
  if (static_cast<std::int64_t>(m.parents.size()) != nj) throw Error(ErrorCode::ParseError, "parents: length != J");
  for (const auto& h : field<json>(header, "hinge_dofs")) {
    if (!h.is_array() || h.size() != 3) throw Error(ErrorCode::ParseError, "hinge_dofs: entries must be [joint, axis, sign]");
    m.hinge_dofs.push_back({h[0].get<int>(), h[1].get<int>(), h[2].get<int>()});
  }
  const auto wrists = field<std::vector<int>>(header, "wrist_joints");
  if (wrists.size() != 2) throw Error(ErrorCode::ParseError, "wrist_joints: need exactly two entries");
  m.wrist_joints = {wrists[0], wrists[1]};
  m.finalize();
  return m;
}

}  // namespace

BodyModel load_model(const std::string& path) {
  try {
    return load_model_unchecked(path);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

}  // namespace meshtri
