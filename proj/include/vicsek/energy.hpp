#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "vicsek/affine.hpp"
#include "vicsek/level.hpp"
#include "vicsek/numeric.hpp"
#include "vicsek/parallel.hpp"

namespace vicsek {

struct EnergyValue {
  double value = 0.0;
  std::optional<Rational> exact;  // integer p with exact samples
};

// Edge index ranges [4 c0, 4 c1) covered by a union of cells.
inline std::vector<std::pair<std::size_t, std::size_t>> region_edge_ranges(const VicsekLevel& g, const std::vector<Word>& region) {
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (const Word& w : region) {
    if (w.level() > g.level())
      throw RegionError("region word " + to_string(w) + " deeper than level " + std::to_string(g.level()));
    const std::uint64_t idx = word_index(g.ratios(), w);
    const std::uint64_t b = g.below(w.level());
    r.emplace_back(4 * idx * b, 4 * (idx + 1) * b);
  }
  std::sort(r.begin(), r.end());
  std::vector<std::pair<std::size_t, std::size_t>> merged;
  for (auto& iv : r) {
    if (!merged.empty() && iv.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, iv.second);
    else
      merged.push_back(iv);
  }
  return merged;
}

namespace detail {

// L^{p-1} * sum over the given edges of |Delta|^p.
inline EnergyValue edge_energy(const VicsekLevel& g, const Samples& s, const Exponent& p,
                               const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  const auto& edges = g.edges();
  const double pv = p.value();
  const bool exact = s.exact && p.is_integer();
  std::size_t total = 0;
  for (auto& r : ranges) total += r.second - r.first;
  // flatten ranges so that chunking depends only on the edge list
  auto edge_at = [&](std::size_t i) -> const Edge& {
    for (auto& r : ranges) {
      if (i < r.second - r.first) return edges[r.first + i];
      i -= r.second - r.first;
    }
    return edges.front();
  };
  const bool single = ranges.size() == 1;
  const std::size_t chunks = chunk_count(total);
  std::vector<double> part(chunks, 0.0), comp(chunks, 0.0);
  std::vector<ExactSum> epart(exact ? chunks : 0);
  for_each_chunk(total, [&](std::size_t b, std::size_t e, std::size_t c) {
    CompensatedSum acc;
    for (std::size_t i = b; i < e; ++i) {
      const Edge& ed = single ? edges[ranges[0].first + i] : edge_at(i);
      acc.add(abs_pow(s.values[ed.head] - s.values[ed.tail], pv));
      if (exact) epart[c].add_abs_pow(s.num[ed.head] - s.num[ed.tail], p.integer());
    }
    part[c] = acc.value();
  });
  CompensatedSum acc;
  for (double v : part) acc.add(v);
  EnergyValue out;
  const double L = static_cast<double>(g.scale());
  out.value = std::pow(L, pv - 1.0) * acc.value();
  if (exact) {
    ExactSum tot;
    for (auto& e : epart) tot.add(e);
    const int pi = p.integer();
    out.exact = Rational(tot.value() * ipow(BigInt(g.scale()), static_cast<unsigned>(pi - 1)),
                         ipow(BigInt(s.den), static_cast<unsigned>(pi)));
    out.value = to_double(*out.exact);
  }
  return out;
}

}  // namespace detail

// E_{p,n;A}: half the scaled sum over adjacent ordered pairs inside the region
// (the whole graph when region is empty).
inline EnergyValue discrete_energy(const VicsekLevel& g, const Samples& s, const Exponent& p,
                                   const std::vector<Word>& region = {}) {
  if (s.level != g.level() || s.values.size() != g.vertex_count()) throw ScaleMismatch("samples do not match the level");
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  if (region.empty())
    ranges.emplace_back(0, g.edge_count());
  else
    ranges = region_edge_ranges(g, region);
  return detail::edge_energy(g, s, p, ranges);
}

inline EnergyValue discrete_energy(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t n,
                                   const std::vector<Word>& region = {}) {
  return discrete_energy(h.level(n), sample(u, h, n), p, region);
}

// Constant slope per edge, oriented tail -> head.  Exact slopes are dnum * unit.
struct GradientField {
  std::size_t level = 0;
  std::int64_t scale = 1;  // L_n; edge length 1/L_n
  std::vector<double> slope;
  bool exact = false;
  std::vector<std::int64_t> dnum;
  Rational unit;

  Rational exact_slope(std::size_t e) const { return Rational(dnum.at(e)) * unit; }
};

inline GradientField gradient_field(const VicsekLevel& g, const Samples& s) {
  if (s.level != g.level()) throw ScaleMismatch("samples do not match the level");
  GradientField f;
  f.level = g.level();
  f.scale = g.scale();
  f.exact = s.exact;
  const double L = static_cast<double>(g.scale());
  f.slope.reserve(g.edge_count());
  for (const Edge& e : g.edges()) f.slope.push_back((s.values[e.head] - s.values[e.tail]) * L);
  if (s.exact) {
    f.unit = Rational(g.scale(), s.den);
    f.dnum.reserve(g.edge_count());
    for (const Edge& e : g.edges()) f.dnum.push_back(s.num[e.head] - s.num[e.tail]);
  }
  return f;
}

inline GradientField gradient_field(const Hierarchy& h, const AffineFunction& u, std::size_t n) {
  return gradient_field(h.level(n), sample(u, h, n));
}

// Sum of |slope|^p times the edge length.
inline EnergyValue energy_of_gradient(const GradientField& f, const Exponent& p) {
  const double pv = p.value();
  const double len = 1.0 / static_cast<double>(f.scale);
  const std::size_t chunks = chunk_count(f.slope.size());
  std::vector<double> part(chunks);
  const bool exact = f.exact && p.is_integer();
  std::vector<ExactSum> epart(exact ? chunks : 0);
  for_each_chunk(f.slope.size(), [&](std::size_t b, std::size_t e, std::size_t c) {
    CompensatedSum acc;
    for (std::size_t i = b; i < e; ++i) {
      acc.add(abs_pow(f.slope[i], pv) * len);
      if (exact) epart[c].add_abs_pow(f.dnum[i], p.integer());
    }
    part[c] = acc.value();
  });
  CompensatedSum acc;
  for (double v : part) acc.add(v);
  EnergyValue out{acc.value(), std::nullopt};
  if (exact) {
    ExactSum tot;
    for (auto& e : epart) tot.add(e);
    out.exact = Rational(tot.value()) * rpow(f.unit, p.integer()) / Rational(f.scale);
    out.value = to_double(*out.exact);
  }
  return out;
}

struct EnergyReport {
  std::vector<double> energies;  // n = 0..N
  std::optional<std::vector<Rational>> exact;
  std::size_t plateau = 0;  // first n from which the sequence is constant
  double limit = 0.0;
  std::optional<Rational> limit_exact;
  bool monotone = true;
};

inline EnergyReport energy_limit(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t N,
                                 double rel_tol = 1e-12) {
  EnergyReport r;
  const std::size_t n0 = u.base_level();
  std::vector<Rational> ex;
  bool exact = u.exact() && p.is_integer();
  for (std::size_t n = 0; n <= N; ++n) {
    // below the base level the function is sampled from its own restriction to V_n
    EnergyValue e;
    if (n >= n0) {
      e = discrete_energy(h, u, p, n);
    } else {
      const Samples fine = sample(u, h, n0);
      const VicsekLevel& g = h.level(n), &gf = h.level(n0);
      Samples s;
      s.level = n;
      s.exact = fine.exact;
      s.den = fine.den;
      for (VertexId v = 0; v < g.vertex_count(); ++v) {
        const LatticePoint q = rescale(h.ratios(), g.point(v), n0);
        const VertexId w = *gf.find_vertex(q.x, q.y);
        s.values.push_back(fine.values[w]);
        if (s.exact) s.num.push_back(fine.num[w]);
      }
      e = discrete_energy(g, s, p);
    }
    r.energies.push_back(e.value);
    if (exact) ex.push_back(*e.exact);
  }
  if (exact) r.exact = ex;
  auto same = [&](std::size_t a, std::size_t b) {
    if (exact) return ex[a] == ex[b];
    const double x = r.energies[a], y = r.energies[b];
    return std::fabs(x - y) <= rel_tol * std::max(std::fabs(x), std::fabs(y));
  };
  auto leq = [&](std::size_t a, std::size_t b) {
    if (exact) return ex[a] <= ex[b];
    return r.energies[a] <= r.energies[b] * (1 + rel_tol);
  };
  r.plateau = N;
  while (r.plateau > 0 && same(r.plateau - 1, N)) --r.plateau;
  for (std::size_t n = 0; n < N; ++n) r.monotone = r.monotone && leq(n, n + 1);
  r.limit = r.energies[N];
  if (exact) r.limit_exact = ex[N];
  return r;
}

// R_p(a, b) = d_geo(a, b)^{p-1}.
inline double resistance(const VicsekLevel& g, VertexId a, VertexId b, const Exponent& p) {
  if (a == b) return 0.0;
  return std::pow(to_double(geodesic_distance(g, a, b)), p.value() - 1.0);
}

inline std::optional<Rational> resistance_exact(const VicsekLevel& g, VertexId a, VertexId b, const Exponent& p) {
  if (!p.is_integer()) return std::nullopt;
  if (a == b) return Rational(0);
  return rpow(geodesic_distance(g, a, b), p.integer() - 1);
}

// 1 / min{E_{p,n}(u) : u(a) = 1, u(b) = 0}, by damped Newton descent on the
// convex vertex-value problem (regularized Hessian, backtracking line search).
inline double resistance_oracle(const VicsekLevel& g, VertexId a, VertexId b, const Exponent& p,
                                int max_iterations = 200, double tol = 1e-12) {
  if (a == b) return 0.0;
  if (a >= g.vertex_count() || b >= g.vertex_count()) throw LookupError("vertex id out of range");
  const double pv = p.value();
  if (!(pv > 1.0 && pv <= 8.0)) throw InvalidArgument("resistance oracle supports p in (1, 8]");
  const std::size_t V = g.vertex_count();
  const auto& edges = g.edges();
  std::vector<int> free_index(V, -1);
  int nf = 0;
  for (VertexId v = 0; v < V; ++v)
    if (v != a && v != b) free_index[v] = nf++;

  std::vector<double> u(V, 0.0);
  u[a] = 1.0;
  auto energy = [&](const std::vector<double>& x) {
    CompensatedSum s;
    for (const Edge& e : edges) s.add(abs_pow(x[e.head] - x[e.tail], pv));
    return s.value();
  };

  using SpMat = Eigen::SparseMatrix<double>;
  auto solve_weighted = [&](const std::vector<double>& w, const Eigen::VectorXd& rhs) {
    std::vector<Eigen::Triplet<double>> tr;
    tr.reserve(4 * edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const int i = free_index[edges[k].tail], j = free_index[edges[k].head];
      if (i >= 0) tr.emplace_back(i, i, w[k]);
      if (j >= 0) tr.emplace_back(j, j, w[k]);
      if (i >= 0 && j >= 0) {
        tr.emplace_back(i, j, -w[k]);
        tr.emplace_back(j, i, -w[k]);
      }
    }
    SpMat H(nf, nf);
    H.setFromTriplets(tr.begin(), tr.end());
    Eigen::SimplicialLDLT<SpMat> ldlt(H);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("singular Hessian in resistance oracle", NAN);
    return Eigen::VectorXd(ldlt.solve(rhs));
  };

  // start from the linear-network solution, slightly perturbed
  {
    std::vector<double> w(edges.size(), 1.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (const Edge& e : edges) {
      if (e.tail == a && free_index[e.head] >= 0) rhs[free_index[e.head]] += 1.0;
      if (e.head == a && free_index[e.tail] >= 0) rhs[free_index[e.tail]] += 1.0;
    }
    Eigen::VectorXd x = solve_weighted(w, rhs);
    for (VertexId v = 0; v < V; ++v)
      if (free_index[v] >= 0) u[v] = x[free_index[v]] + 1e-3 * std::sin(1.0 + static_cast<double>(v));
  }

  double S = energy(u);
  double grad_norm = INFINITY;
  for (int it = 0; it < max_iterations; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(nf);
    std::vector<double> w(edges.size());
    double scale = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k) scale = std::max(scale, std::fabs(u[edges[k].head] - u[edges[k].tail]));
    const double delta = 1e-9 * std::max(scale, 1e-300);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Edge& e = edges[k];
      const double d = u[e.head] - u[e.tail];
      const double gk = pv * std::pow(std::fabs(d), pv - 1.0) * (d < 0 ? -1.0 : 1.0);
      if (free_index[e.head] >= 0) grad[free_index[e.head]] += gk;
      if (free_index[e.tail] >= 0) grad[free_index[e.tail]] -= gk;
      w[k] = pv * (pv - 1.0) * std::pow(d * d + delta * delta, (pv - 2.0) / 2.0);
    }
    grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm <= tol * std::max(S, 1e-300)) return 1.0 / (std::pow(static_cast<double>(g.scale()), pv - 1.0) * S);
    Eigen::VectorXd step = solve_weighted(w, grad);
    // Newton decrement: estimates the remaining energy gap
    const double decrement = grad.dot(step);
    if (decrement >= 0 && decrement <= 1e-13 * S)
      return 1.0 / (std::pow(static_cast<double>(g.scale()), pv - 1.0) * S);
    double t = 1.0;
    std::vector<double> trial(u);
    double St = S;
    for (int ls = 0; ls < 60; ++ls) {
      for (VertexId v = 0; v < V; ++v)
        if (free_index[v] >= 0) trial[v] = u[v] - t * step[free_index[v]];
      St = energy(trial);
      if (St <= S) break;
      t *= 0.5;
    }
    if (St > S) break;
    const double drop = S - St;
    u.swap(trial);
    S = St;
    if (drop <= 1e-17 * S && grad_norm <= 1e-7 * S)
      return 1.0 / (std::pow(static_cast<double>(g.scale()), pv - 1.0) * S);
  }
  if (grad_norm <= 1e-7 * S) return 1.0 / (std::pow(static_cast<double>(g.scale()), pv - 1.0) * S);
  throw ConvergenceError("resistance oracle did not converge", grad_norm);
}

}  // namespace vicsek
