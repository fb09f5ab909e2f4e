// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-accumulation tape for scalar expressions.
//
// Every arithmetic operation on a Var appends one node holding at most two
// parent indices and the local partial derivatives with respect to them.
// A backward sweep over the node list in reverse order accumulates adjoints.
// Constants (plain doubles promoted to Var) carry index -1 and are never
// recorded. A Tape must outlive every Var recorded on it and is not
// thread-safe; use one tape per evaluation context.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace meshtri::ad {

class Tape;

struct Var {
  double val = 0.0;
  std::int32_t idx = -1;
  Tape* tape = nullptr;

  Var() = default;
  Var(double v) : val(v) {}  // NOLINT(google-explicit-constructor): constants promote implicitly
  Var(double v, std::int32_t i, Tape* t) : val(v), idx(i), tape(t) {}

  bool is_constant() const { return idx < 0; }
};

class Tape {
 public:
  Tape() { nodes_.reserve(1 << 14); }

  Var variable(double v) { return push(v, -1, 0.0, -1, 0.0); }

  Var push(double v, std::int32_t a, double da, std::int32_t b, double db) {
    nodes_.push_back({a, b, da, db});
    return Var(v, static_cast<std::int32_t>(nodes_.size() - 1), this);
  }

  std::size_t size() const { return nodes_.size(); }

  void clear() { nodes_.clear(); }

  /// Adjoints of every node with respect to `output`.
  std::vector<double> gradient(const Var& output) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (output.is_constant()) return adj;
    adj[static_cast<std::size_t>(output.idx)] = 1.0;
    for (std::size_t n = static_cast<std::size_t>(output.idx) + 1; n-- > 0;) {
      const double g = adj[n];
      if (g == 0.0) continue;
      const Node& node = nodes_[n];
      if (node.a >= 0) adj[static_cast<std::size_t>(node.a)] += g * node.da;
      if (node.b >= 0) adj[static_cast<std::size_t>(node.b)] += g * node.db;
    }
    return adj;
  }

 private:
  struct Node {
    std::int32_t a;
    std::int32_t b;
    double da;
    double db;
  };
  std::vector<Node> nodes_;
};

namespace detail {
inline Tape* tape_of(const Var& a, const Var& b) { return a.tape ? a.tape : b.tape; }
inline Var unary(const Var& a, double v, double d) {
  if (a.is_constant()) return Var(v);
  return a.tape->push(v, a.idx, d, -1, 0.0);
}
inline Var binary(const Var& a, const Var& b, double v, double da, double db) {
  if (a.is_constant() && b.is_constant()) return Var(v);
  return tape_of(a, b)->push(v, a.idx, da, b.idx, db);
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) { return detail::binary(a, b, a.val + b.val, 1.0, 1.0); }
inline Var operator-(const Var& a, const Var& b) { return detail::binary(a, b, a.val - b.val, 1.0, -1.0); }
inline Var operator*(const Var& a, const Var& b) { return detail::binary(a, b, a.val * b.val, b.val, a.val); }
inline Var operator/(const Var& a, const Var& b) {
  const double inv = 1.0 / b.val;
  return detail::binary(a, b, a.val * inv, inv, -a.val * inv * inv);
}
inline Var operator-(const Var& a) { return detail::unary(a, -a.val, -1.0); }

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var sin(const Var& a) { return detail::unary(a, std::sin(a.val), std::cos(a.val)); }
inline Var cos(const Var& a) { return detail::unary(a, std::cos(a.val), -std::sin(a.val)); }
inline Var exp(const Var& a) {
  const double e = std::exp(a.val);
  return detail::unary(a, e, e);
}
inline Var sqrt(const Var& a) {
  const double s = std::sqrt(a.val);
  return detail::unary(a, s, 0.5 / s);
}

inline double value(const Var& a) { return a.val; }
inline double value(double a) { return a; }

}  // namespace meshtri::ad
