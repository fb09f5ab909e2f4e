// SPDX-License-Identifier: Apache-2.0
//
// Internal JSON helpers: deterministic text output with a fixed float
// format, strict object readers and file I/O.
#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "meshtri/error.hpp"

namespace meshtri::jsonio {

using ojson = nlohmann::ordered_json;

/// Serializes with two-space indentation. Floats use "%.{digits}f" when
/// `fixed_digits` >= 0 and "%.17g" otherwise; integers print exactly.
std::string dump(const ojson& j, int fixed_digits = -1);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Parses text, mapping JSON errors to ParseError with `what` as context.
nlohmann::json parse(const std::string& text, const std::string& what);
nlohmann::json parse_file(const std::string& path);

/// Throws InvalidConfig naming the first key of `obj` outside `allowed`.
void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& what);

template <class T>
T get(const nlohmann::json& obj, const char* key, const std::string& what) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::ParseError, what + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": field '" + key + "': " + e.what());
  }
}

}  // namespace meshtri::jsonio
