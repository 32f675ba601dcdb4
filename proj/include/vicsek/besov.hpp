#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vicsek/affine.hpp"
#include "vicsek/energy.hpp"
#include "vicsek/level.hpp"
#include "vicsek/measure.hpp"
#include "vicsek/numeric.hpp"
#include "vicsek/parallel.hpp"

namespace vicsek {

// mu_m: weight 1/#V_m on every vertex of V_m.
inline Rational vertex_weight(const VicsekLevel& g) { return Rational(1, static_cast<std::int64_t>(g.vertex_count())); }
inline std::vector<double> vertex_measure_weights(const VicsekLevel& g) {
  return std::vector<double>(g.vertex_count(), 1.0 / static_cast<double>(g.vertex_count()));
}

namespace detail {

inline void check_ball_levels(const VicsekLevel& g, const Samples& s, std::size_t n) {
  if (s.level != g.level() || s.values.size() != g.vertex_count()) throw ScaleMismatch("samples do not match the level");
  if (n > g.level())
    throw ScaleMismatch("ball scale " + std::to_string(n) + " finer than vertex level " + std::to_string(g.level()));
}

// d(x, y) < rho_n  <=>  |dx|^2 + |dy|^2 < 8 R^2 with R = L_m / L_n.
struct BallPredicate {
  i128 threshold;
  explicit BallPredicate(std::int64_t R) : threshold(i128(8) * R * R) {}
  bool operator()(std::int64_t dx, std::int64_t dy) const { return i128(dx) * dx + i128(dy) * dy < threshold; }
};

inline double ball_total(const std::vector<double>& rows, std::size_t V) {
  CompensatedSum acc;
  for (double r : rows) acc.add(r);
  const double v = static_cast<double>(V);
  return acc.value() / (v * v);
}

}  // namespace detail

struct BallEnergy {
  double value = 0.0;                  // I_{m,n}
  std::optional<Rational> exact;       // p = 2 block recursion only
  std::vector<double> rows;            // sum_y |u(x)-u(y)|^p per x (indexed/brute force)
  std::vector<std::uint32_t> counts;   // #{y in B(x, rho_n)} per x (indexed/brute force)
};

// I_{m,n} by the plain double loop over V_m x V_m.  Reference only: O(#V_m^2).
inline BallEnergy ball_energy_bruteforce(const VicsekLevel& g, const Samples& s, const Exponent& p, std::size_t n) {
  detail::check_ball_levels(g, s, n);
  const std::size_t V = g.vertex_count();
  const detail::BallPredicate inside(g.scale() / g.ratios().scale_i64(n));
  const double pv = p.value();
  BallEnergy b;
  b.rows.assign(V, 0.0);
  b.counts.assign(V, 0);
  parallel_for(V, [&](std::size_t x) {
    CompensatedSum row;
    std::uint32_t cnt = 0;
    for (VertexId y = 0; y < V; ++y) {
      if (!inside(g.x(y) - g.x(x), g.y(y) - g.y(x))) continue;
      row.add(abs_pow(s.values[x] - s.values[y], pv));
      ++cnt;
    }
    b.rows[x] = row.value();
    b.counts[x] = cnt;
  });
  b.value = detail::ball_total(b.rows, V);
  return b;
}

// Same sums, with y restricted to vertices owned by the level-n cells whose
// center offset (i, j) * 2R from the owner of x has i^2 + j^2 < 8.  A vertex
// lies in the closed square of its owner cell, so no pair inside the ball is
// missed; candidates are visited in increasing vertex id, so every row adds the
// same terms in the same order as the double loop.
inline BallEnergy ball_energy(const Hierarchy& h, const Samples& s, const Exponent& p, std::size_t n) {
  const VicsekLevel& g = h.level(s.level);
  detail::check_ball_levels(g, s, n);
  const VicsekLevel& c = h.level(n);
  const std::int64_t R = g.scale() / c.scale();
  const detail::BallPredicate inside(R);
  const double pv = p.value();
  const std::size_t V = g.vertex_count();
  BallEnergy b;
  b.rows.assign(V, 0.0);
  b.counts.assign(V, 0);
  parallel_for(c.cell_count(), [&](std::size_t cell) {
    const LatticePoint ctr = c.cell_center(cell);
    std::vector<CellId> near;
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j) {
        if (i * i + j * j >= 8) continue;
        if (auto id = c.find_cell(ctr.x + 2 * i, ctr.y + 2 * j)) near.push_back(*id);
      }
    std::sort(near.begin(), near.end());
    for (VertexId x = g.owned_begin(n, cell); x < g.owned_end(n, cell); ++x) {
      CompensatedSum row;
      std::uint32_t cnt = 0;
      for (CellId nb : near)
        for (VertexId y = g.owned_begin(n, nb); y < g.owned_end(n, nb); ++y) {
          if (!inside(g.x(y) - g.x(x), g.y(y) - g.y(x))) continue;
          row.add(abs_pow(s.values[x] - s.values[y], pv));
          ++cnt;
        }
      b.rows[x] = row.value();
      b.counts[x] = cnt;
    }
  });
  b.value = detail::ball_total(b.rows, V);
  return b;
}

// Exact I_{m,n} for p = 2 by recursion over pairs of cells: a pair whose squares
// lie entirely inside (or outside) the ball condition is summed from the moments
// count, sum u, sum u^2 of the owned vertices; only straddling pairs refine.
inline BallEnergy ball_energy_exact(const VicsekLevel& g, const Samples& s, std::size_t n) {
  detail::check_ball_levels(g, s, n);
  if (!s.exact) throw InvalidArgument("exact ball energy needs exact samples");
  const std::size_t m = g.level();
  const std::size_t V = g.vertex_count();
  const std::int64_t R = g.scale() / g.ratios().scale_i64(n);
  const detail::BallPredicate inside(R);
  std::vector<i128> S1(V + 1, 0), S2(V + 1, 0);
  for (VertexId v = 0; v < V; ++v) {
    S1[v + 1] = S1[v] + s.num[v];
    S2[v + 1] = S2[v] + i128(s.num[v]) * s.num[v];
  }
  std::vector<std::int64_t> half(m + 1);
  std::vector<std::uint64_t> kids(m + 1, 0);
  for (std::size_t k = 0; k <= m; ++k) half[k] = g.scale() / g.ratios().scale_i64(k);
  for (std::size_t k = 0; k < m; ++k) kids[k] = static_cast<std::uint64_t>(2 * g.ratios().ratio(k + 1) - 1);
  auto center = [&](std::size_t k, std::uint64_t c) {
    const VertexId v = g.cell(c * g.below(k))[0];
    return std::array<std::int64_t, 2>{g.x(v), g.y(v)};
  };
  struct Block {
    i128 n, s1, s2;
  };
  auto block = [&](std::size_t k, std::uint64_t c) {
    const VertexId a = g.owned_begin(k, c), b = g.owned_end(k, c);
    return Block{i128(b - a), S1[b] - S1[a], S2[b] - S2[a]};
  };

  // Pairs are taken unordered at each level and the recursion is split over the
  // level-1 pairs so that partial sums can be merged in a fixed order.
  struct Item {
    std::size_t k;
    std::uint64_t a, b;
  };
  std::vector<Item> roots;
  if (m == 0) {
    roots.push_back({0, 0, 0});
  } else {
    for (std::uint64_t i = 0; i < kids[0]; ++i)
      for (std::uint64_t j = i; j < kids[0]; ++j) roots.push_back({1, i, j});
  }
  std::vector<BigInt> part(roots.size());
  parallel_for(
      roots.size(),
      [&](std::size_t r) {
        ExactSum acc;
        std::vector<Item> stack{roots[r]};
        while (!stack.empty()) {
          const Item it = stack.back();
          stack.pop_back();
          const auto ca = center(it.k, it.a), cb = center(it.k, it.b);
          const std::int64_t ax = std::llabs(ca[0] - cb[0]), ay = std::llabs(ca[1] - cb[1]);
          const std::int64_t w = 2 * half[it.k];
          const std::int64_t gx = std::max<std::int64_t>(0, ax - w), gy = std::max<std::int64_t>(0, ay - w);
          if (!inside(gx, gy)) continue;
          const bool same = it.a == it.b;
          if (inside(ax + w, ay + w)) {
            const Block A = block(it.k, it.a);
            if (same) {
              acc.add(to_big(A.n * A.s2 - A.s1 * A.s1) * 2);
            } else {
              const Block B = block(it.k, it.b);
              acc.add(to_big(A.n * B.s2 + B.n * A.s2 - 2 * A.s1 * B.s1) * 2);
            }
            continue;
          }
          if (it.k == m) {
            for (VertexId x = g.owned_begin(m, it.a); x < g.owned_end(m, it.a); ++x)
              for (VertexId y = g.owned_begin(m, it.b); y < g.owned_end(m, it.b); ++y) {
                if (same && y <= x) continue;
                if (!inside(g.x(y) - g.x(x), g.y(y) - g.y(x))) continue;
                const i128 d = i128(s.num[x]) - s.num[y];
                acc.add(d * d * 2);
              }
            continue;
          }
          const std::uint64_t K = kids[it.k];
          for (std::uint64_t i = 0; i < K; ++i)
            for (std::uint64_t j = same ? i : 0; j < K; ++j) stack.push_back({it.k + 1, it.a * K + i, it.b * K + j});
        }
        part[r] = acc.value();
      },
      1);
  BigInt tot = 0;
  for (auto& x : part) tot += x;
  BallEnergy b;
  const BigInt V2 = BigInt(V) * V;
  b.exact = Rational(tot, BigInt(s.den) * s.den * V2);
  b.value = to_double(*b.exact);
  return b;
}

// phi(rho_n)^e and psi(rho_n) in log space, for any depth.
class ScaleFactors {
 public:
  ScaleFactors(const RatioSequence& rs, const Exponent& p) : log_(rs.with_p(p)), rs_(rs.with_p(p)) {}
  long double log_phi(std::size_t n) { return log_.log_phi(n); }
  long double log_psi(std::size_t n) { return log_.log_psi(n); }
  double phi_pow(std::size_t n, long double e) { return e == 0 ? 1.0 : static_cast<double>(std::exp(e * log_.log_phi(n))); }
  int ratio(std::size_t k) { return log_.ratio(k); }
  // t_l = (2l - 1) l^{p-1} = phi(rho_{n-1}) / phi(rho_n)
  long double log_t(int l) const {
    return std::log(2.0L * l - 1) + static_cast<long double>(rs_.p().value() - 1.0) * std::log(static_cast<long double>(l));
  }

 private:
  LogScales log_;
  RatioSequence rs_;
};

struct BesovProfile {
  Exponent p;
  double beta = 1.0, beta_star = 1.0;
  std::size_t m = 0, N = 0;
  std::vector<double> ball;                      // I_{m,n}
  std::optional<std::vector<Rational>> ball_exact;
  std::vector<double> phi_hat;                   // estimator (a)
  std::optional<std::vector<double>> phi_hat_mean;  // estimator (b)
  std::vector<double> energy;                    // E_n^beta
};

enum class BallMethod { automatic, indexed, exact };

// I_{m,n}(u) for n = 0..N; beta-independent, so one table serves a whole beta grid.
struct BallProfile {
  std::size_t m = 0, N = 0;
  std::vector<double> value;
  std::optional<std::vector<Rational>> exact;
  std::optional<std::vector<double>> mean;  // (1/#V) sum_x row_x / count_x
};

inline BallProfile ball_profile(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t m, std::size_t N,
                                bool mean_estimator = false, BallMethod method = BallMethod::automatic) {
  if (m < N) throw ScaleMismatch("vertex level m must be at least N");
  if (u.base_level() > m) throw LevelError("base level above the vertex level");
  const Samples s = sample(u, h, m);
  const bool exact_ok = s.exact && p.is_integer() && p.integer() == 2;
  const bool exact = method == BallMethod::exact || (method == BallMethod::automatic && !mean_estimator && exact_ok);
  if (exact && !exact_ok) throw InvalidArgument("exact ball energies need p = 2 and exact values");
  if (exact && mean_estimator) throw InvalidArgument("the mean estimator needs per-vertex rows (indexed method)");
  BallProfile bp;
  bp.m = m;
  bp.N = N;
  if (exact) bp.exact.emplace();
  if (mean_estimator) bp.mean.emplace();
  const double V = static_cast<double>(h.level(m).vertex_count());
  for (std::size_t n = 0; n <= N; ++n) {
    const BallEnergy b = exact ? ball_energy_exact(h.level(m), s, n) : ball_energy(h, s, p, n);
    bp.value.push_back(b.value);
    if (exact) bp.exact->push_back(*b.exact);
    if (mean_estimator) {
      CompensatedSum acc;
      for (std::size_t x = 0; x < b.rows.size(); ++x)
        if (b.counts[x] > 0) acc.add(b.rows[x] / static_cast<double>(b.counts[x]));
      bp.mean->push_back(acc.value() / V);
    }
  }
  return bp;
}

// Estimator (a): phi(rho_n)^{-beta/beta*} psi(rho_n)^{-1} I_{m,n}(u).
// Estimator (b), when the ball table has it: each inner sum divided by its
// empirical ball weight #{y}/#V_m instead of psi(rho_n).
inline BesovProfile phi_profile(const Hierarchy& h, const BallProfile& bp, const std::vector<double>& energies,
                                const Exponent& p, double beta) {
  if (!(beta >= 0)) throw InvalidArgument("beta must be nonnegative");
  if (energies.size() < bp.N + 1) throw InvalidArgument("need E_{p,n} for n <= N");
  const double bs = h.ratios().beta_star();
  ScaleFactors sf(h.ratios(), p);
  BesovProfile r;
  r.p = p;
  r.beta = beta;
  r.beta_star = bs;
  r.m = bp.m;
  r.N = bp.N;
  r.ball = bp.value;
  r.ball_exact = bp.exact;
  if (bp.mean) r.phi_hat_mean.emplace();
  const long double ratio = static_cast<long double>(beta) / bs;
  for (std::size_t n = 0; n <= bp.N; ++n) {
    const double norm = static_cast<double>(std::exp(-ratio * sf.log_phi(n) - sf.log_psi(n)));
    r.phi_hat.push_back(norm * bp.value[n]);
    if (bp.mean) r.phi_hat_mean->push_back(sf.phi_pow(n, -ratio) * (*bp.mean)[n]);
    r.energy.push_back(sf.phi_pow(n, 1 - ratio) * energies[n]);
  }
  return r;
}

inline BesovProfile phi_profile(const Hierarchy& h, const AffineFunction& u, const Exponent& p, double beta, std::size_t m,
                                std::size_t N, bool mean_estimator = false, BallMethod method = BallMethod::automatic) {
  if (!(beta >= 0)) throw InvalidArgument("beta must be nonnegative");
  const BallProfile bp = ball_profile(h, u, p, m, N, mean_estimator, method);
  return phi_profile(h, bp, energy_limit(h, u, p, N).energies, p, beta);
}

// [u]_{B^beta_{p,q}} from a profile: (sum_n phi_hat(rho_n)^{q/p} log l_{n+1})^{1/q},
// or max_n phi_hat(rho_n)^{1/p} for q = infinity.
inline double besov_seminorm(const Hierarchy& h, const BesovProfile& prof, double q) {
  if (!(q > 1)) throw InvalidArgument("q must be > 1 (or infinity)");
  const double pv = prof.p.value();
  if (std::isinf(q)) {
    double m = 0;
    for (double v : prof.phi_hat) m = std::max(m, std::pow(v, 1 / pv));
    return m;
  }
  LogScales ls(h.ratios());
  CompensatedSum acc;
  for (std::size_t n = 0; n < prof.phi_hat.size(); ++n)
    acc.add(std::pow(prof.phi_hat[n], q / pv) * std::log(static_cast<double>(ls.ratio(n + 1))));
  return std::pow(acc.value(), 1 / q);
}

enum class Tail { none, plateau };

struct DiscreteProfiles {
  double beta = 1.0, beta_star = 1.0;
  std::vector<double> energy;  // E_n^beta, n <= N
  std::vector<double> base;    // E_{p,n}
  double sup = 0.0;            // E^beta_{p,infinity}
  double sum = 0.0;            // E^beta_{p,p}
  std::size_t tail_terms = 0;
};

// E_n^beta = phi(rho_n)^{1 - beta/beta*} E_{p,n}.  With a plateau tail the
// constant E_{p,N} is continued past N term by term until the terms stop
// contributing (infinite when beta >= beta* and u is not constant).
inline DiscreteProfiles discrete_profiles(const Hierarchy& h, const AffineFunction& u, const Exponent& p, double beta,
                                          std::size_t N, Tail tail = Tail::none) {
  if (!(beta >= 0)) throw InvalidArgument("beta must be nonnegative");
  if (tail == Tail::plateau && N < u.base_level()) throw LevelError("plateau tail needs N >= base level");
  DiscreteProfiles d;
  d.beta = beta;
  d.beta_star = h.ratios().beta_star();
  const long double e = 1.0L - static_cast<long double>(beta) / d.beta_star;
  ScaleFactors sf(h.ratios(), p);
  d.base = energy_limit(h, u, p, N).energies;
  CompensatedSum acc;
  for (std::size_t n = 0; n <= N; ++n) {
    d.energy.push_back(sf.phi_pow(n, e) * d.base[n]);
    d.sup = std::max(d.sup, d.energy.back());
    acc.add(d.energy.back());
  }
  const double plateau = d.base[N];
  if (tail == Tail::plateau && plateau > 0) {
    if (e <= 0) {
      d.sum = HUGE_VAL;
      if (e < 0) d.sup = HUGE_VAL;
      return d;
    }
    for (std::size_t n = N + 1;; ++n) {
      const double term = sf.phi_pow(n, e) * plateau;
      acc.add(term);
      ++d.tail_terms;
      if (term <= 1e-18 * acc.value()) break;
      if (d.tail_terms > 50'000'000) throw ConvergenceError("plateau tail did not converge", term);
    }
  }
  d.sum = acc.value();
  return d;
}

// sum_{n<=N} sum over ordered adjacent pairs of V_n of w_n |u(x)-u(y)|^p with
// w_n = phi(rho_n)^{1-beta/beta*} L_n^{p-1} / 2.
inline double jump_kernel_energy(const Hierarchy& h, const AffineFunction& u, const Exponent& p, double beta, std::size_t N) {
  const double pv = p.value();
  const long double e = 1.0L - static_cast<long double>(beta) / h.ratios().beta_star();
  ScaleFactors sf(h.ratios(), p);
  CompensatedSum acc;
  for (std::size_t n = 0; n <= N; ++n) {
    const std::size_t lvl = std::max(n, u.base_level());
    const VicsekLevel& g = h.level(n);
    const double w = 0.5 * sf.phi_pow(n, e) * std::pow(static_cast<double>(g.scale()), pv - 1);
    if (lvl == n) {
      const Samples s = sample(u, h, n);
      for (VertexId x = 0; x < g.vertex_count(); ++x)
        for (auto* y = g.neighbors_begin(x); y != g.neighbors_end(x); ++y) acc.add(w * abs_pow(s.values[x] - s.values[*y], pv));
    } else {
      // below the base level: values are the restriction of u to V_n
      const Samples fine = sample(u, h, lvl);
      const VicsekLevel& gf = h.level(lvl);
      for (VertexId x = 0; x < g.vertex_count(); ++x) {
        const LatticePoint px = rescale(h.ratios(), g.point(x), lvl);
        const double ux = fine.values[*gf.find_vertex(px.x, px.y)];
        for (auto* y = g.neighbors_begin(x); y != g.neighbors_end(x); ++y) {
          const LatticePoint py = rescale(h.ratios(), g.point(*y), lvl);
          acc.add(w * abs_pow(ux - fine.values[*gf.find_vertex(py.x, py.y)], pv));
        }
      }
    }
  }
  return acc.value();
}

struct BbmRow {
  double epsilon = 0.0, beta = 0.0;
  double value = 0.0;                       // (beta* - beta) E^beta_{p,p}(u)
  double finite_lo = 0.0, finite_hi = 0.0;  // bracket at this epsilon
  double limit_lo = 0.0, limit_hi = 0.0;    // E beta* / log sup t, E beta* / log inf t
  bool inside = true;
};

// Bracket for sum_{n>=0} phi(rho_n)^delta E_{p,n} using E_{p,0} <= E_{p,n} <= E
// and t_inf^{-delta} <= phi(rho_{n+1})^delta / phi(rho_n)^delta <= t_sup^{-delta}.
inline std::vector<BbmRow> bbm_curve(const Hierarchy& h, const AffineFunction& u, const Exponent& p,
                                     const std::vector<double>& epsilons, std::size_t N, Tail tail = Tail::plateau,
                                     double rel_tol = 1e-9) {
  const double bs = h.ratios().beta_star();
  ScaleFactors sf(h.ratios(), p);
  long double lt_inf = INFINITY, lt_sup = -INFINITY;
  for (int l : h.ratios().generator().alphabet()) {
    lt_inf = std::min(lt_inf, sf.log_t(l));
    lt_sup = std::max(lt_sup, sf.log_t(l));
  }
  std::vector<BbmRow> out;
  for (double eps : epsilons) {
    if (!(eps > 0 && eps < bs)) throw InvalidArgument("epsilon must lie in (0, beta*)");
    const DiscreteProfiles d = discrete_profiles(h, u, p, bs - eps, N, tail);
    BbmRow r;
    r.epsilon = eps;
    r.beta = bs - eps;
    r.value = eps * d.sum;
    const long double delta = static_cast<long double>(eps) / bs;
    const long double phi0 = std::exp(delta * sf.log_phi(0));
    const double E0 = d.base.front(), E = d.base.back();
    r.finite_lo = static_cast<double>(eps * E0 * phi0 / (1 - std::exp(-delta * lt_sup)));
    r.finite_hi = static_cast<double>(eps * E * phi0 / (1 - std::exp(-delta * lt_inf)));
    r.limit_lo = static_cast<double>(E * bs / lt_sup);
    r.limit_hi = static_cast<double>(E * bs / lt_inf);
    r.inside = r.value >= r.finite_lo * (1 - rel_tol) && r.value <= r.finite_hi * (1 + rel_tol);
    out.push_back(r);
  }
  return out;
}

struct TailBracket {
  double sum = 0.0;        // sum_{k=n}^{N} phi(rho_k)^delta
  double lo = 0.0, hi = 0.0;
  double remainder = 0.0;  // bound on sum_{k>N}
  bool holds = true;
};

inline TailBracket geometric_tail_bracket(const RatioSequence& rs, const Exponent& p, std::size_t n, std::size_t N, double delta) {
  if (N < n) throw InvalidArgument("empty range");
  ScaleFactors sf(rs, p);
  long double lt_inf = INFINITY, lt_sup = -INFINITY;
  for (int l : rs.generator().alphabet()) {
    lt_inf = std::min(lt_inf, sf.log_t(l));
    lt_sup = std::max(lt_sup, sf.log_t(l));
  }
  TailBracket b;
  CompensatedSum acc;
  for (std::size_t k = n; k <= N; ++k) acc.add(sf.phi_pow(k, delta));
  b.sum = acc.value();
  const long double d = delta;
  b.lo = static_cast<double>(sf.phi_pow(n, d) / (1 - std::exp(-d * lt_sup)));
  b.hi = static_cast<double>(sf.phi_pow(n, d) / (1 - std::exp(-d * lt_inf)));
  b.remainder = static_cast<double>(sf.phi_pow(N + 1, d) / (1 - std::exp(-d * lt_inf)));
  b.holds = b.sum <= b.hi * (1 + 1e-12) && b.sum + b.remainder >= b.lo * (1 - 1e-12);
  return b;
}

enum class Trend { divergent, plateau, vanishing, mixed };

inline const char* to_string(Trend t) {
  switch (t) {
    case Trend::divergent: return "divergent";
    case Trend::plateau: return "plateau";
    case Trend::vanishing: return "vanishing";
    default: return "mixed";
  }
}

struct SweepRow {
  double beta = 0.0;
  std::vector<double> energy;  // E_n^beta
  std::vector<double> growth;  // E_{n+1}^beta / E_n^beta
  Trend trend = Trend::mixed;
};

// Trends are read off from n >= base level, where E_{p,n} has reached its plateau.
inline std::vector<SweepRow> critical_sweep(const Hierarchy& h, const AffineFunction& u, const Exponent& p,
                                            const std::vector<double>& betas, std::size_t N, double rel_tol = 1e-12) {
  std::vector<SweepRow> out;
  for (double beta : betas) {
    const DiscreteProfiles d = discrete_profiles(h, u, p, beta, N);
    SweepRow r;
    r.beta = beta;
    r.energy = d.energy;
    bool up = true, flat = true, down = true;
    for (std::size_t n = 0; n < N; ++n) {
      r.growth.push_back(d.energy[n] > 0 ? d.energy[n + 1] / d.energy[n] : NAN);
      if (n < u.base_level()) continue;
      const double g = r.growth.back();
      up = up && g > 1 + rel_tol;
      down = down && g < 1 - rel_tol;
      flat = flat && std::fabs(g - 1) <= rel_tol;
    }
    r.trend = up ? Trend::divergent : flat ? Trend::plateau : down ? Trend::vanishing : Trend::mixed;
    out.push_back(r);
  }
  return out;
}

struct WeakMonotonicity {
  double ratio = NAN;  // sup_{n<=N} phi_hat / min_{n in window} phi_hat
  double sup = 0.0, min = 0.0;
  bool degenerate = false;  // 0/0
};

inline WeakMonotonicity weak_monotonicity_report(const BesovProfile& prof, std::size_t lo, std::size_t hi) {
  if (lo > hi || hi > prof.N || lo < 1) throw InvalidArgument("window must be a nonempty subrange of [1, N]");
  WeakMonotonicity w;
  w.min = HUGE_VAL;
  for (std::size_t n = 0; n <= prof.N; ++n) w.sup = std::max(w.sup, prof.phi_hat[n]);
  for (std::size_t n = lo; n <= hi; ++n) w.min = std::min(w.min, prof.phi_hat[n]);
  if (w.min == 0) {
    w.degenerate = true;
    return w;
  }
  w.ratio = w.sup / w.min;
  return w;
}

inline WeakMonotonicity weak_monotonicity_report(const Hierarchy& h, const AffineFunction& u, const Exponent& p, std::size_t m,
                                                 std::size_t N, std::size_t lo, std::size_t hi) {
  return weak_monotonicity_report(phi_profile(h, u, p, h.ratios().beta_star(), m, N), lo, hi);
}

struct EquivalenceBand {
  double ball_over_energy_lo = HUGE_VAL, ball_over_energy_hi = 0;  // phi_hat_n / sup_{n<=k<=N} E_k
  double energy_over_ball_lo = HUGE_VAL, energy_over_ball_hi = 0;  // E_n / sup_{n<=k<=N} phi_hat_k
};

inline EquivalenceBand equivalence_band(const BesovProfile& prof) {
  EquivalenceBand b;
  const std::size_t N = prof.N;
  for (std::size_t n = 1; n + 2 <= N; ++n) {
    double se = 0, sp = 0;
    for (std::size_t k = n; k <= N; ++k) se = std::max(se, prof.energy[k]), sp = std::max(sp, prof.phi_hat[k]);
    if (se > 0) {
      b.ball_over_energy_lo = std::min(b.ball_over_energy_lo, prof.phi_hat[n] / se);
      b.ball_over_energy_hi = std::max(b.ball_over_energy_hi, prof.phi_hat[n] / se);
    }
    if (sp > 0) {
      b.energy_over_ball_lo = std::min(b.energy_over_ball_lo, prof.energy[n] / sp);
      b.energy_over_ball_hi = std::max(b.energy_over_ball_hi, prof.energy[n] / sp);
    }
  }
  return b;
}

}  // namespace vicsek
