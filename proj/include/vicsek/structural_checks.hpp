#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "vicsek/affine.hpp"
#include "vicsek/energy.hpp"
#include "vicsek/level.hpp"

namespace vicsek {

// max over x != y in V_N of |u(x) - u(y)|^p / d(x, y)^{p-1}, d Euclidean.
// Branch and bound over pairs of cells of equal level: a pair of cells is
// discarded once its value-range / square-gap bound cannot beat the best pair.
inline double morrey_numerator(const VicsekLevel& g, const std::vector<double>& val, const Exponent& p) {
  const std::size_t N = g.level();
  const double pv = p.value();
  const double L = static_cast<double>(g.scale());
  // lo/hi over the vertices of each cell, per level
  std::vector<std::vector<double>> lo(N + 1), hi(N + 1);
  lo[N].resize(g.cell_count());
  hi[N].resize(g.cell_count());
  for (CellId c = 0; c < g.cell_count(); ++c) {
    double a = INFINITY, b = -INFINITY;
    for (VertexId v : g.cell(c)) a = std::min(a, val[v]), b = std::max(b, val[v]);
    lo[N][c] = a;
    hi[N][c] = b;
  }
  for (std::size_t k = N; k-- > 0;) {
    const std::uint64_t kids = static_cast<std::uint64_t>(2 * g.ratios().ratio(k + 1) - 1);
    const std::size_t cnt = lo[k + 1].size() / kids;
    lo[k].assign(cnt, INFINITY);
    hi[k].assign(cnt, -INFINITY);
    for (std::size_t c = 0; c < lo[k + 1].size(); ++c) {
      lo[k][c / kids] = std::min(lo[k][c / kids], lo[k + 1][c]);
      hi[k][c / kids] = std::max(hi[k][c / kids], hi[k + 1][c]);
    }
  }
  // centers of level-k cells in level-N coordinates
  auto center = [&](std::size_t k, std::uint64_t c) {
    const VertexId v = g.cell(c * g.below(k))[0];
    // the first level-N descendant starts at the center letter chain, so its
    // center is the center of the level-k cell
    return std::array<std::int64_t, 2>{g.x(v), g.y(v)};
  };
  std::vector<std::int64_t> half(N + 1);
  for (std::size_t k = 0; k <= N; ++k) half[k] = g.scale() / g.ratios().scale_i64(k);

  double best = 0.0;
  auto pair_bound = [&](std::size_t k, std::uint64_t a, std::uint64_t b) {
    const auto ca = center(k, a), cb = center(k, b);
    const double gx = std::max<double>(0.0, static_cast<double>(std::llabs(ca[0] - cb[0]) - 2 * half[k]));
    const double gy = std::max<double>(0.0, static_cast<double>(std::llabs(ca[1] - cb[1]) - 2 * half[k]));
    const double d2 = (gx * gx + gy * gy) / (2 * L * L);
    const double diff = std::max(hi[k][a] - lo[k][b], hi[k][b] - lo[k][a]);
    if (d2 == 0) return HUGE_VAL;
    return std::pow(diff, pv) / std::pow(std::sqrt(d2), pv - 1);
  };
  struct Item {
    std::size_t k;
    std::uint64_t a, b;
  };
  std::vector<Item> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    if (it.k == N) {
      for (VertexId x : g.cell(it.a))
        for (VertexId y : g.cell(it.b)) {
          if (x == y) continue;
          const double dx = static_cast<double>(g.x(x) - g.x(y)), dy = static_cast<double>(g.y(x) - g.y(y));
          const double d = std::sqrt((dx * dx + dy * dy) / 2) / L;
          best = std::max(best, std::pow(std::fabs(val[x] - val[y]), pv) / std::pow(d, pv - 1));
        }
      continue;
    }
    const std::uint64_t kids = static_cast<std::uint64_t>(2 * g.ratios().ratio(it.k + 1) - 1);
    for (std::uint64_t i = 0; i < kids; ++i)
      for (std::uint64_t j = (it.a == it.b ? i : 0); j < kids; ++j) {
        const std::uint64_t a = it.a * kids + i, b = it.b * kids + j;
        if (hi[it.k + 1][a] == lo[it.k + 1][a] && hi[it.k + 1][b] == lo[it.k + 1][b] && lo[it.k + 1][a] == lo[it.k + 1][b])
          continue;  // constant on both
        if (pair_bound(it.k + 1, a, b) <= best) continue;
        stack.push_back({it.k + 1, a, b});
      }
  }
  return best;
}

struct StructuralReport {
  std::size_t level = 0;
  double p = 2.0;
  // (a) E(uv) <= 2^{p-1} (|u|^p E(v) + |v|^p E(u))
  double product_lhs = 0, product_rhs = 0;
  bool product_ok = true;
  // (b) E(phi(u)) <= E(u)
  double contraction_lhs = 0, contraction_rhs = 0;
  bool contraction_ok = true;
  // (c) empirical constants; 0 for constant u
  double spectral_gap = 0;  // mean |u - <u>|^p over mu_N / (diam^{p-1} E(u))
  double morrey = 0;        // max |u(x)-u(y)|^p / (d^{p-1} E(u))
  // (d) E(u+v) = E(u) + E(v) when no edge carries both gradients
  bool supports_separated = false;
  bool locality_ok = true;
  // (e) Clarkson: rhs - lhs, must be >= 0
  double clarkson_residual = 0;
  bool clarkson_ok = true;

  bool all_ok() const { return product_ok && contraction_ok && locality_ok && clarkson_ok; }
};

inline StructuralReport structural_checks(const Hierarchy& h, const AffineFunction& u, const AffineFunction& v,
                                        const Exponent& p, std::size_t N,
                                        const std::function<double(double)>& contraction = [](double t) { return std::fabs(t); },
                                        double rel_tol = 1e-12) {
  if (N < std::max(u.base_level(), v.base_level())) throw LevelError("check level below the base levels");
  const VicsekLevel& g = h.level(N);
  const Samples su = sample(u, h, N), sv = sample(v, h, N);
  const double pv = p.value();
  auto E = [&](const Samples& s) { return discrete_energy(g, s, p); };
  auto leq = [&](double a, double b) { return a <= b + rel_tol * std::max(std::fabs(a), std::fabs(b)); };
  const EnergyValue Eu = E(su), Ev = E(sv);
  const double nu = u.sup_norm(), nv = v.sup_norm();

  StructuralReport r;
  r.level = N;
  r.p = pv;

  const EnergyValue Euv = E(multiply_samples(su, sv));
  r.product_lhs = Euv.value;
  r.product_rhs = std::pow(2.0, pv - 1) * (abs_pow(nu, pv) * Ev.value + abs_pow(nv, pv) * Eu.value);
  if (Euv.exact && Eu.exact && Ev.exact) {
    const int k = p.integer();
    const Rational rhs = ipow(BigInt(2), static_cast<unsigned>(k - 1)) *
                         (rpow(u.sup_norm_exact(), k) * *Ev.exact + rpow(v.sup_norm_exact(), k) * *Eu.exact);
    r.product_ok = *Euv.exact <= rhs;
  } else {
    r.product_ok = leq(r.product_lhs, r.product_rhs);
  }

  r.contraction_lhs = E(map_samples(su, contraction)).value;
  r.contraction_rhs = Eu.value;
  r.contraction_ok = leq(r.contraction_lhs, r.contraction_rhs);

  if (Eu.value > 0) {
    CompensatedSum mean, dev;
    for (double x : su.values) mean.add(x);
    const double m = mean.value() / static_cast<double>(su.values.size());
    for (double x : su.values) dev.add(abs_pow(x - m, pv));
    r.spectral_gap = dev.value() / static_cast<double>(su.values.size()) / (std::pow(2.0, pv - 1) * Eu.value);
    r.morrey = morrey_numerator(g, su.values, p) / Eu.value;
  }

  r.supports_separated = true;
  for (const Edge& e : g.edges())
    if (su.values[e.head] != su.values[e.tail] && sv.values[e.head] != sv.values[e.tail]) {
      r.supports_separated = false;
      break;
    }
  if (r.supports_separated) {
    const EnergyValue Es = E(add_samples(su, sv));
    if (Es.exact && Eu.exact && Ev.exact)
      r.locality_ok = *Es.exact == *Eu.exact + *Ev.exact;
    else
      r.locality_ok = std::fabs(Es.value - Eu.value - Ev.value) <= rel_tol * std::max(Es.value, 1e-300);
  }

  // E((u +- v)/2) = E(u +- v) / 2^p
  const EnergyValue Ep = E(add_samples(su, sv, 1, 1)), Em = E(add_samples(su, sv, 1, -1));
  if (pv >= 2) {
    if (Ep.exact && Em.exact && Eu.exact && Ev.exact) {
      const Rational two_p = ipow(BigInt(2), static_cast<unsigned>(p.integer()));
      const Rational res = (*Eu.exact + *Ev.exact) / 2 - (*Ep.exact + *Em.exact) / two_p;
      r.clarkson_residual = to_double(res);
      r.clarkson_ok = res >= 0;
    } else {
      const double two_p = std::pow(2.0, pv);
      const double rhs = (Eu.value + Ev.value) / 2, lhs = (Ep.value + Em.value) / two_p;
      r.clarkson_residual = rhs - lhs;
      r.clarkson_ok = leq(lhs, rhs);
    }
  } else {
    const double q = 1.0 / (pv - 1), two_p = std::pow(2.0, pv);
    const double lhs = std::pow(Ep.value / two_p, q) + std::pow(Em.value / two_p, q);
    const double rhs = std::pow((Eu.value + Ev.value) / 2, q);
    r.clarkson_residual = rhs - lhs;
    r.clarkson_ok = leq(lhs, rhs);
  }
  return r;
}

}  // namespace vicsek
