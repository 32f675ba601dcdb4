#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "vicsek/affine.hpp"
#include "vicsek/energy.hpp"
#include "vicsek/level.hpp"
#include "vicsek/numeric.hpp"
#include "vicsek/parallel.hpp"

namespace vicsek {

// Mass per word of W_m, indexed by word_index.
struct CellMeasure {
  std::size_t level = 0;
  std::vector<double> mass;
  std::optional<std::vector<Rational>> exact;
  double total = 0.0;
  std::optional<Rational> total_exact;

  double operator[](std::size_t i) const { return mass[i]; }
};

namespace detail {

// Per level-m cell c: scale * sum_{edges e in K_c at level M} |d_e|^p, where d
// is either a float difference/slope or an integer numerator.
template <class FloatTerm, class IntTerm>
CellMeasure cell_sums(const VicsekLevel& g, std::size_t m, bool exact, int pint, const Rational& exact_factor,
                      FloatTerm&& fterm, IntTerm&& iterm) {
  CellMeasure cm;
  cm.level = m;
  const std::uint64_t cells = g.ratios().word_count(m).convert_to<std::uint64_t>();
  const std::uint64_t per = 4 * g.below(m);
  cm.mass.assign(cells, 0.0);
  std::vector<BigInt> big(exact ? cells : 0);
  parallel_for(cells, [&](std::size_t c) {
    CompensatedSum acc;
    ExactSum ex;
    for (std::size_t e = c * per; e < (c + 1) * per; ++e) {
      acc.add(fterm(e));
      if (exact) ex.add_abs_pow(iterm(e), pint);
    }
    cm.mass[c] = acc.value();
    if (exact) big[c] = ex.value();
  });
  CompensatedSum tot;
  for (double v : cm.mass) tot.add(v);
  cm.total = tot.value();
  if (exact) {
    std::vector<Rational> q(cells);
    Rational t = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      q[c] = Rational(big[c]) * exact_factor;
      t += q[c];
      cm.mass[c] = to_double(q[c]);
    }
    cm.exact = std::move(q);
    cm.total_exact = t;
    cm.total = to_double(t);
  }
  return cm;
}

}  // namespace detail

// Gamma_p<u>(K_w) = integral over the skeleton inside K_w of |du|^p, for all w in W_m.
inline CellMeasure gamma_cells(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t m) {
  const std::size_t M = std::max(m, u.base_level());
  const VicsekLevel& g = h.level(M);
  const GradientField f = gradient_field(h, u, M);
  const double pv = p.value(), len = 1.0 / static_cast<double>(f.scale);
  const bool exact = f.exact && p.is_integer();
  const Rational factor = exact ? rpow(f.unit, p.integer()) / Rational(f.scale) : Rational(0);
  return detail::cell_sums(
      g, m, exact, p.is_integer() ? p.integer() : 0, factor, [&](std::size_t e) { return abs_pow(f.slope[e], pv) * len; },
      [&](std::size_t e) { return exact ? f.dnum[e] : std::int64_t(0); });
}

// m_p<u>({w}) = E_{p;K_w}(u), the restricted discrete energy at a level where it
// has reached its plateau (any level >= n0 for affine u).
inline CellMeasure word_energy_measure(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t n) {
  const std::size_t M = std::max(n, u.base_level());
  const VicsekLevel& g = h.level(M);
  const Samples s = sample(u, h, M);
  const double pv = p.value();
  const double Lp = std::pow(static_cast<double>(g.scale()), pv - 1.0);
  const bool exact = s.exact && p.is_integer();
  Rational factor = 0;
  if (exact)
    factor = Rational(ipow(BigInt(g.scale()), static_cast<unsigned>(p.integer() - 1)),
                      ipow(BigInt(s.den), static_cast<unsigned>(p.integer())));
  const auto& E = g.edges();
  return detail::cell_sums(
      g, n, exact, p.is_integer() ? p.integer() : 0, factor,
      [&](std::size_t e) { return Lp * abs_pow(s.values[E[e].head] - s.values[E[e].tail], pv); },
      [&](std::size_t e) { return exact ? s.num[E[e].head] - s.num[E[e].tail] : std::int64_t(0); });
}

struct CoincidenceReport {
  double max_relative = 0.0;  // max |Gamma(K_w) - m({w})| / total over all tested w
  bool exact = false;         // compared as rationals
  bool identical = true;      // exact mode: every cylinder agrees
};

inline CoincidenceReport coincidence_check(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t depth) {
  CoincidenceReport r;
  r.exact = u.exact() && p.is_integer();
  for (std::size_t d = 0; d <= depth; ++d) {
    const CellMeasure a = gamma_cells(h, u, p, d), b = word_energy_measure(h, u, p, d);
    const double tot = std::max(a.total, b.total);
    for (std::size_t i = 0; i < a.mass.size(); ++i) {
      if (r.exact && (*a.exact)[i] != (*b.exact)[i]) r.identical = false;
      if (tot > 0) r.max_relative = std::max(r.max_relative, std::fabs(a.mass[i] - b.mass[i]) / tot);
    }
  }
  if (r.exact && r.identical) r.max_relative = 0.0;
  return r;
}

// Gauss-Legendre nodes and weights on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int q) {
  if (q < 1) throw InvalidArgument("quadrature needs at least one node");
  std::vector<double> x(q), w(q);
  for (int i = 0; i < q; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (q + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = 0;
      for (int k = 1; k <= q; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = q * (z * p0 - p1) / (z * z - 1);
      const double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1 - z);
    w[i] = 1.0 / ((1 - z * z) * dp * dp);
  }
  return {x, w};
}

struct ChainRuleReport {
  std::size_t level = 0, cell_level = 0;
  int nodes = 0;
  std::vector<double> discrete;    // level-N energies of f(u) per cell: lower estimate
  std::vector<double> quadrature;  // |f'(u)|^p |du|^p integrated per cell
  double discrete_total = 0.0, quadrature_total = 0.0;
  double total_deviation = 0.0;     // |discrete - quadrature| / quadrature
  double max_cell_deviation = 0.0;  // relative to the quadrature total
};

// Gamma_p<f(u)> against |f'(u)|^p dGamma_p<u>, on the level-m cells, from
// level-N edges with q Gauss nodes per edge.
inline ChainRuleReport chain_rule_check(const Hierarchy& h, const AffineFunction& u, const std::function<double(double)>& f,
                                        const std::function<double(double)>& fprime, const Exponent& p, std::size_t N,
                                        int q, std::size_t m = 0) {
  if (N < u.base_level()) throw LevelError("chain rule level below the base level");
  if (m > N) throw LevelError("cell level above the truncation level");
  const VicsekLevel& g = h.level(N);
  const Samples s = sample(u, h, N);
  const Samples fs = map_samples(s, f);
  const auto [x, w] = gauss_legendre(q);
  const double pv = p.value(), L = static_cast<double>(g.scale());
  const double Lp = std::pow(L, pv - 1.0);
  const auto& E = g.edges();
  ChainRuleReport r;
  r.level = N;
  r.cell_level = m;
  r.nodes = q;
  const std::uint64_t cells = g.ratios().word_count(m).convert_to<std::uint64_t>();
  const std::uint64_t per = 4 * g.below(m);
  r.discrete.assign(cells, 0.0);
  r.quadrature.assign(cells, 0.0);
  parallel_for(cells, [&](std::size_t c) {
    CompensatedSum d, qs;
    for (std::size_t e = c * per; e < (c + 1) * per; ++e) {
      const double a = s.values[E[e].tail], b = s.values[E[e].head];
      d.add(Lp * abs_pow(fs.values[E[e].head] - fs.values[E[e].tail], pv));
      const double slope = abs_pow((b - a) * L, pv);
      if (slope == 0) continue;
      double acc = 0;
      for (int i = 0; i < q; ++i) acc += w[i] * abs_pow(fprime(a + (b - a) * x[i]), pv);
      qs.add(acc * slope / L);
    }
    r.discrete[c] = d.value();
    r.quadrature[c] = qs.value();
  });
  CompensatedSum dt, qt;
  for (std::size_t c = 0; c < cells; ++c) dt.add(r.discrete[c]), qt.add(r.quadrature[c]);
  r.discrete_total = dt.value();
  r.quadrature_total = qt.value();
  const double scale = std::max(r.quadrature_total, r.discrete_total);
  if (scale > 0) {
    r.total_deviation = std::fabs(r.discrete_total - r.quadrature_total) / scale;
    for (std::size_t c = 0; c < cells; ++c)
      r.max_cell_deviation = std::max(r.max_cell_deviation, std::fabs(r.discrete[c] - r.quadrature[c]) / scale);
  }
  return r;
}

// Gamma<a u + b> == |a|^p Gamma<u> cell by cell, compared exactly when possible.
inline bool linear_chain_rule(const Hierarchy& h, const AffineFunction& u, const Rational& a, const Rational& b,
                              const Exponent& p, std::size_t m, double rel_tol = 1e-12) {
  const CellMeasure lhs = gamma_cells(h, u.affine_map(a, b), p, m);
  const CellMeasure rhs = gamma_cells(h, u, p, m);
  if (lhs.exact && rhs.exact) {
    const Rational ap = rpow(a < 0 ? Rational(-a) : a, p.integer());
    for (std::size_t i = 0; i < rhs.mass.size(); ++i)
      if ((*lhs.exact)[i] != ap * (*rhs.exact)[i]) return false;
    return true;
  }
  const double ap = abs_pow(to_double(a), p.value());
  for (std::size_t i = 0; i < rhs.mass.size(); ++i)
    if (std::fabs(lhs.mass[i] - ap * rhs.mass[i]) > rel_tol * std::max(ap * rhs.total, 1e-300)) return false;
  return true;
}

// Leibniz rule per level-N edge: Delta(uv) against u(tail) Delta v + v(tail) Delta u,
// as a slope deviation; shrinks like the edge length.
inline double leibniz_deviation(const Hierarchy& h, const AffineFunction& u, const AffineFunction& v, std::size_t N) {
  const VicsekLevel& g = h.level(N);
  const Samples a = sample(u, h, N), b = sample(v, h, N);
  const double L = static_cast<double>(g.scale());
  double dev = 0;
  for (const Edge& e : g.edges()) {
    const double d_uv = (a.values[e.head] * b.values[e.head] - a.values[e.tail] * b.values[e.tail]) * L;
    const double rule = (a.values[e.tail] * (b.values[e.head] - b.values[e.tail]) +
                         b.values[e.tail] * (a.values[e.head] - a.values[e.tail])) * L;
    dev = std::max(dev, std::fabs(d_uv - rule));
  }
  return dev;
}

struct TriangleReport {
  double lhs = 0.0, rhs = 0.0;
  bool holds = true;
};

// (int g dGamma<u1+u2>)^{1/p} <= (int g dGamma<u1>)^{1/p} + (int g dGamma<u2>)^{1/p}
// for g >= 0 constant on level-m cells.
inline TriangleReport triangle_check(const Hierarchy& h, const AffineFunction& u1, const AffineFunction& u2,
                                     const std::vector<double>& weights, const Exponent& p, std::size_t m) {
  for (double x : weights)
    if (!(x >= 0)) throw InvalidArgument("cell weights must be nonnegative");
  const CellMeasure s = gamma_cells(h, combine(u1, u2, h), p, m);
  const CellMeasure a = gamma_cells(h, u1, p, m), b = gamma_cells(h, u2, p, m);
  if (weights.size() != s.mass.size())
    throw InvalidArgument("expected " + std::to_string(s.mass.size()) + " cell weights, got " + std::to_string(weights.size()));
  CompensatedSum ss, sa, sb;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    ss.add(weights[i] * s.mass[i]);
    sa.add(weights[i] * a.mass[i]);
    sb.add(weights[i] * b.mass[i]);
  }
  const double ip = 1.0 / p.value();
  TriangleReport r;
  r.lhs = std::pow(ss.value(), ip);
  r.rhs = std::pow(sa.value(), ip) + std::pow(sb.value(), ip);
  r.holds = r.lhs <= r.rhs * (1 + 1e-12) + 1e-300;
  return r;
}

struct PushforwardHistogram {
  double lo = 0.0, hi = 0.0;
  std::vector<double> mass;  // bin i covers [lo + i w, lo + (i+1) w)
  double total = 0.0;
  std::size_t point_masses = 0;  // edges with positive mass and zero image width

  double bin_left(std::size_t i) const { return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(mass.size()); }
  double bin_right(std::size_t i) const { return lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(mass.size()); }
};

// u_*(Gamma_p<u>) binned over [min u, max u]; within an edge the mass is uniform
// in the image since u is affine there.
inline PushforwardHistogram pushforward_profile(const Hierarchy& h, const AffineFunction& u, const Exponent& p,
                                                std::size_t bins) {
  if (bins == 0) throw InvalidArgument("need at least one bin");
  check_affine(u, h);
  const VicsekLevel& g = h.level(u.base_level());
  const auto& val = u.values();
  PushforwardHistogram r;
  r.lo = *std::min_element(val.begin(), val.end());
  r.hi = *std::max_element(val.begin(), val.end());
  if (!(r.hi > r.lo)) throw DegenerateInput("constant function: the image range is a single point");
  r.mass.assign(bins, 0.0);
  const double pv = p.value(), L = static_cast<double>(g.scale()), width = (r.hi - r.lo) / static_cast<double>(bins);
  std::vector<CompensatedSum> acc(bins);
  CompensatedSum tot;
  for (const Edge& e : g.edges()) {
    const double a = std::min(val[e.tail], val[e.head]), b = std::max(val[e.tail], val[e.head]);
    const double m = abs_pow((b - a) * L, pv) / L;
    tot.add(m);
    if (m == 0) continue;
    if (!(b > a)) {
      ++r.point_masses;
      acc[std::min(bins - 1, static_cast<std::size_t>((a - r.lo) / width))].add(m);
      continue;
    }
    const auto first = std::min(bins - 1, static_cast<std::size_t>((a - r.lo) / width));
    const auto last = std::min(bins - 1, static_cast<std::size_t>((b - r.lo) / width));
    for (std::size_t i = first; i <= last; ++i) {
      const double l = std::max(a, r.bin_left(i)), rr = std::min(b, i + 1 == bins ? r.hi : r.bin_right(i));
      if (rr > l) acc[i].add(m * (rr - l) / (b - a));
    }
  }
  for (std::size_t i = 0; i < bins; ++i) r.mass[i] = acc[i].value();
  r.total = tot.value();
  return r;
}

}  // namespace vicsek
