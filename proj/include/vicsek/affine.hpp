#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "vicsek/level.hpp"
#include "vicsek/numeric.hpp"

namespace vicsek {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ResourceError("exact numerator overflows 64 bits", "");
  return r;
}
inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ResourceError("exact numerator overflows 64 bits", "");
  return r;
}

// Values on V_{n0}; either real, or exact rationals num/den over one common denominator.
class AffineFunction {
 public:
  AffineFunction() = default;

  static AffineFunction from_values(std::size_t base_level, std::vector<double> values) {
    AffineFunction u;
    u.base_ = base_level;
    u.values_ = std::move(values);
    return u;
  }

  static AffineFunction from_rationals(std::size_t base_level, const std::vector<Rational>& values) {
    BigInt den = 1;
    for (const Rational& q : values) den = boost::multiprecision::lcm(den, boost::multiprecision::denominator(q));
    if (den > BigInt(INT64_C(1) << 40)) throw ResourceError("common denominator too large for exact mode", den.str());
    std::vector<std::int64_t> num;
    num.reserve(values.size());
    for (const Rational& q : values) {
      BigInt n = boost::multiprecision::numerator(q) * (den / boost::multiprecision::denominator(q));
      if (abs(n) > BigInt(INT64_C(1) << 52)) throw ResourceError("exact value too large", n.str());
      num.push_back(n.convert_to<std::int64_t>());
    }
    return from_numerators(base_level, std::move(num), den.convert_to<std::int64_t>());
  }

  static AffineFunction from_numerators(std::size_t base_level, std::vector<std::int64_t> num, std::int64_t den) {
    if (den <= 0) throw InvalidArgument("denominator must be positive");
    AffineFunction u;
    u.base_ = base_level;
    u.exact_ = true;
    u.den_ = den;
    u.values_.reserve(num.size());
    for (auto v : num) u.values_.push_back(static_cast<double>(v) / static_cast<double>(den));
    u.num_ = std::move(num);
    return u;
  }

  std::size_t base_level() const { return base_; }
  std::size_t size() const { return values_.size(); }
  bool exact() const { return exact_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::int64_t>& numerators() const { return num_; }
  std::int64_t denominator() const { return den_; }
  Rational exact_value(VertexId v) const { return Rational(num_.at(v), den_); }

  // a u + b; stays exact when u is exact.
  AffineFunction affine_map(const Rational& a, const Rational& b) const {
    if (!exact_) {
      std::vector<double> v(values_);
      const double ad = to_double(a), bd = to_double(b);
      for (double& x : v) x = ad * x + bd;
      return from_values(base_, std::move(v));
    }
    std::vector<Rational> q;
    q.reserve(num_.size());
    for (auto n : num_) q.push_back(a * Rational(n, den_) + b);
    return from_rationals(base_, q);
  }

  // Supremum norm; attained on V_{n0}.
  double sup_norm() const {
    double m = 0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
  }
  Rational sup_norm_exact() const {
    std::int64_t m = 0;
    for (auto v : num_) m = std::max(m, v < 0 ? -v : v);
    return Rational(m, den_);
  }

 private:
  std::size_t base_ = 0;
  bool exact_ = false;
  std::vector<double> values_;
  std::vector<std::int64_t> num_;
  std::int64_t den_ = 1;
};

// Function values on V_n.  In exact mode value(v) = num[v] / den.
struct Samples {
  std::size_t level = 0;
  std::vector<double> values;
  bool exact = false;
  std::vector<std::int64_t> num;
  std::int64_t den = 1;

  Rational exact_value(VertexId v) const { return Rational(num.at(v), den); }
};

inline void check_affine(const AffineFunction& u, const Hierarchy& h) {
  const std::size_t n0 = u.base_level();
  if (n0 > h.max_level()) throw LevelError("base level " + std::to_string(n0) + " not built");
  if (u.size() != h.level(n0).vertex_count())
    throw InvalidArgument("affine function has " + std::to_string(u.size()) + " values, V_" + std::to_string(n0) + " has " +
                          std::to_string(h.level(n0).vertex_count()));
}

// Samples of the n0-piecewise affine extension on V_n: linear in arclength along
// level-n0 edges, constant on the components hanging off the level-n0 skeleton.
inline Samples sample(const AffineFunction& u, const Hierarchy& h, std::size_t n) {
  check_affine(u, h);
  const std::size_t n0 = u.base_level();
  if (n < n0) throw LevelError("level " + std::to_string(n) + " below base level " + std::to_string(n0));
  const VicsekLevel& base = h.level(n0);
  const VicsekLevel& g = h.level(n);
  const std::int64_t R = g.scale() / base.scale();
  Samples s;
  s.level = n;
  s.exact = u.exact();
  s.values.assign(g.vertex_count(), 0.0);
  if (s.exact) {
    s.num.assign(g.vertex_count(), 0);
    s.den = checked_mul(u.denominator(), R);
  }
  const auto& uv = u.values();
  const auto& un = u.numerators();
  for (VertexId v : g.bfs_order()) {
    const CellId a = g.ancestor(g.owner_cell(v), n0);
    const auto& ids = base.cell(a);
    const LatticePoint c = base.cell_center(a);
    const std::int64_t dx = g.x(v) - c.x * R, dy = g.y(v) - c.y * R;
    if (std::abs(dx) != std::abs(dy)) {
      const VertexId p = g.parent(v);
      s.values[v] = s.values[p];
      if (s.exact) s.num[v] = s.num[p];
      continue;
    }
    const std::int64_t t = std::abs(dx);
    if (t == 0) {
      s.values[v] = uv[ids[0]];
      if (s.exact) s.num[v] = checked_mul(un[ids[0]], R);
      continue;
    }
    const int j = dx > 0 ? (dy > 0 ? 1 : 4) : (dy > 0 ? 2 : 3);
    const VertexId q = ids[static_cast<std::size_t>(j)];
    s.values[v] = uv[ids[0]] + (uv[q] - uv[ids[0]]) * (static_cast<double>(t) / static_cast<double>(R));
    if (s.exact) s.num[v] = checked_add(checked_mul(un[ids[0]], R), checked_mul(un[q] - un[ids[0]], t));
  }
  return s;
}

// The same function re-based at a finer level n.
inline AffineFunction lift(const AffineFunction& u, const Hierarchy& h, std::size_t n) {
  if (n == u.base_level()) return u;
  Samples s = sample(u, h, n);
  if (s.exact) return AffineFunction::from_numerators(n, std::move(s.num), s.den);
  return AffineFunction::from_values(n, std::move(s.values));
}

// a u + b v on the common refinement of their base levels.
inline AffineFunction combine(const AffineFunction& u, const AffineFunction& v, const Hierarchy& h, std::int64_t a = 1,
                              std::int64_t b = 1) {
  const std::size_t n = std::max(u.base_level(), v.base_level());
  const AffineFunction U = lift(u, h, n), V = lift(v, h, n);
  if (U.exact() && V.exact()) {
    const std::int64_t g = std::lcm(U.denominator(), V.denominator());
    const std::int64_t fu = g / U.denominator(), fv = g / V.denominator();
    std::vector<std::int64_t> num(U.size());
    for (std::size_t i = 0; i < num.size(); ++i)
      num[i] = checked_add(checked_mul(checked_mul(U.numerators()[i], fu), a), checked_mul(checked_mul(V.numerators()[i], fv), b));
    return AffineFunction::from_numerators(n, std::move(num), g);
  }
  std::vector<double> val(U.size());
  for (std::size_t i = 0; i < val.size(); ++i)
    val[i] = static_cast<double>(a) * U.values()[i] + static_cast<double>(b) * V.values()[i];
  return AffineFunction::from_values(n, std::move(val));
}

inline double evaluate_affine(const AffineFunction& u, const Hierarchy& h, std::size_t n, VertexId v) {
  if (v >= h.level(n).vertex_count()) throw LookupError("vertex id out of range");
  return sample(u, h, n).values[v];
}

// Pointwise map of samples; exactness is dropped.
template <class F>
Samples map_samples(const Samples& s, F&& f) {
  Samples r;
  r.level = s.level;
  r.values.reserve(s.values.size());
  for (double v : s.values) r.values.push_back(f(v));
  return r;
}

inline Samples add_samples(const Samples& a, const Samples& b, double ca = 1.0, double cb = 1.0) {
  if (a.level != b.level || a.values.size() != b.values.size()) throw ScaleMismatch("samples at different levels");
  Samples r;
  r.level = a.level;
  r.values.resize(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) r.values[i] = ca * a.values[i] + cb * b.values[i];
  if (a.exact && b.exact && ca == std::round(ca) && cb == std::round(cb)) {
    const std::int64_t g = std::lcm(a.den, b.den);
    const std::int64_t fa = g / a.den, fb = g / b.den;
    r.exact = true;
    r.den = g;
    r.num.resize(a.num.size());
    const auto ia = static_cast<std::int64_t>(ca), ib = static_cast<std::int64_t>(cb);
    for (std::size_t i = 0; i < a.num.size(); ++i)
      r.num[i] = checked_add(checked_mul(checked_mul(a.num[i], fa), ia), checked_mul(checked_mul(b.num[i], fb), ib));
  }
  return r;
}

inline Samples multiply_samples(const Samples& a, const Samples& b) {
  if (a.level != b.level || a.values.size() != b.values.size()) throw ScaleMismatch("samples at different levels");
  Samples r;
  r.level = a.level;
  r.values.resize(a.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) r.values[i] = a.values[i] * b.values[i];
  if (a.exact && b.exact) {
    r.exact = true;
    r.den = checked_mul(a.den, b.den);
    r.num.resize(a.num.size());
    for (std::size_t i = 0; i < a.num.size(); ++i) r.num[i] = checked_mul(a.num[i], b.num[i]);
  }
  return r;
}

}  // namespace vicsek
