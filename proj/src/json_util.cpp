// SPDX-License-Identifier: Apache-2.0
#include "json_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace meshtri::jsonio {

namespace {

void write(const ojson& j, int fixed_digits, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ojson(it.key()).dump() + ": ";
        write(it.value(), fixed_digits, depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalar = true;
      for (const auto& e : j) scalar = scalar && e.is_primitive();
      out += scalar ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += scalar ? ", " : ",\n";
        first = false;
        if (!scalar) out += pad;
        write(e, fixed_digits, depth + 1, out);
      }
      out += scalar ? "]" : "\n" + close + "]";
      return;
    }
    case ojson::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[64];
      if (fixed_digits >= 0)
        std::snprintf(buf, sizeof buf, "%.*f", fixed_digits, v);
      else
        std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const ojson& j, int fixed_digits) {
  std::string out;
  write(j, fixed_digits, 0, out);
  out += "\n";
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

nlohmann::json parse(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

nlohmann::json parse_file(const std::string& path) { return parse(read_text(path), path); }

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& what) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, what + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorCode::InvalidConfig, what + ": unknown field '" + it.key() + "'");
}

}  // namespace meshtri::jsonio
