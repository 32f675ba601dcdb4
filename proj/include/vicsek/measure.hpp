#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vicsek/level.hpp"
#include "vicsek/numeric.hpp"
#include "vicsek/ratio_sequence.hpp"

namespace vicsek {

struct ScaleValues {
  std::size_t n = 0;
  Rational rho;
  Rational psi;
  double phi = 0.0;                 // rho^{p-1} psi
  std::optional<Rational> phi_exact;  // integer p only
};

// phi = rho^{p-1} psi; exact for integer p.
inline ScaleValues scale_values(const RatioSequence& rs, std::size_t n) {
  ScaleValues s;
  s.n = n;
  s.rho = Rational(2) / rs.scale(n);
  s.psi = Rational(1) / rs.word_count(n);
  const Exponent& p = rs.p();
  if (p.is_integer()) {
    s.phi_exact = rpow(s.rho, p.integer() - 1) * s.psi;
    s.phi = to_double(*s.phi_exact);
  } else {
    const long double lr = std::log(2.0L) - std::log(static_cast<long double>(to_double(rs.scale(n))));
    const long double lpsi = -std::log(static_cast<long double>(to_double(rs.word_count(n))));
    const long double e = static_cast<long double>(p.num() - p.den()) / static_cast<long double>(p.den());
    s.phi = static_cast<double>(std::exp(e * lr + lpsi));
  }
  return s;
}

inline std::vector<ScaleValues> scale_table(const RatioSequence& rs, std::size_t N) {
  std::vector<ScaleValues> out;
  for (std::size_t n = 0; n <= N; ++n) out.push_back(scale_values(rs, n));
  return out;
}

// log rho_n, log psi(rho_n), log phi(rho_n) for arbitrarily deep n; the ratio
// sequence is extended through its generator as needed.
class LogScales {
 public:
  explicit LogScales(const RatioSequence& rs) : rs_(rs), p_(rs.p().value()) {
    log_rho_.push_back(std::log(2.0L));
    log_psi_.push_back(0.0L);
  }
  long double log_rho(std::size_t n) { return extend(n), log_rho_[n]; }
  long double log_psi(std::size_t n) { return extend(n), log_psi_[n]; }
  long double log_phi(std::size_t n) {
    extend(n);
    return static_cast<long double>(p_ - 1.0) * log_rho_[n] + log_psi_[n];
  }
  int ratio(std::size_t k) {
    extend(k);
    return rs_.ratio(k);
  }

 private:
  void extend(std::size_t n) {
    if (n > rs_.depth()) rs_ = rs_.with_depth(std::max(n, 2 * rs_.depth() + 16));
    while (log_rho_.size() <= n) {
      const int l = rs_.ratio(log_rho_.size());
      log_rho_.push_back(log_rho_.back() - std::log(static_cast<long double>(l)));
      log_psi_.push_back(log_psi_.back() - std::log(static_cast<long double>(2 * l - 1)));
    }
  }

  RatioSequence rs_;
  double p_;
  std::vector<long double> log_rho_, log_psi_;
};

inline Rational mu_cell(const RatioSequence& rs, const Word& w) {
  check_word(rs, w);
  return Rational(1) / rs.word_count(w.level());
}

// The n with rho_{n+1} < r <= rho_n; 0 for r >= 2.
inline std::size_t scale_index(const RatioSequence& rs, const Rational& r) {
  if (r <= 0) throw InvalidArgument("radius must be positive");
  std::size_t n = 0;
  while (true) {
    if (n + 1 > rs.depth()) throw DepthError("radius below rho_" + std::to_string(rs.depth()) + "; extend the ratio depth");
    if (r > Rational(2) / rs.scale(n + 1)) return n;
    ++n;
  }
}

// psi(r) = psi(rho_n) for rho_{n+1} < r <= rho_n, and 1 for r >= 2.
inline Rational psi_at(const RatioSequence& rs, const Rational& r) {
  if (r >= 2) return 1;
  return Rational(1) / rs.word_count(scale_index(rs, r));
}

struct RegularizedScales {
  Rational psi_tilde;
  double phi_tilde = 0.0;
};

// Piecewise-linear psi through the nodes (rho_n, psi(rho_n)); r/2 beyond 2.
inline RegularizedScales regularized_scales(const RatioSequence& rs, const Rational& r) {
  if (r <= 0) throw InvalidArgument("radius must be positive");
  RegularizedScales out;
  if (r >= 2) {
    out.psi_tilde = r / 2;
  } else {
    const std::size_t n = scale_index(rs, r);
    const Rational r0 = Rational(2) / rs.scale(n + 1), r1 = Rational(2) / rs.scale(n);
    const Rational p0 = Rational(1) / rs.word_count(n + 1), p1 = Rational(1) / rs.word_count(n);
    out.psi_tilde = p0 + (p1 - p0) * (r - r0) / (r1 - r0);
  }
  out.phi_tilde = std::pow(to_double(r), rs.p().value() - 1.0) * to_double(out.psi_tilde);
  return out;
}

struct BallBounds {
  Rational lower;
  Rational upper;
  std::uint64_t inside = 0;      // counted at their own level
  std::uint64_t straddling = 0;  // at the refinement depth
  std::size_t depth = 0;
};

// Brackets mu(B(center, r)) by classifying cells down to level d.
inline BallBounds mu_ball_bounds(const RatioSequence& rs, const LatticePoint& center, const Rational& r, std::size_t d) {
  if (r <= 0) throw InvalidArgument("radius must be positive");
  if (d > rs.depth()) throw DepthError("refinement depth " + std::to_string(d) + " beyond ratio depth");
  const std::size_t S = std::max(center.scale, d);
  const LatticePoint P = rescale(rs, center, S);
  const BigInt LS = rs.scale(S);
  // squared scaled distance D at scale S is inside iff D * den^2 < 2 num^2 LS^2
  const BigInt rn = boost::multiprecision::numerator(r), rd = boost::multiprecision::denominator(r);
  const BigInt rhs = 2 * rn * rn * LS * LS;
  const BigInt rd2 = rd * rd;

  BallBounds out;
  out.depth = d;
  std::vector<std::uint64_t> inside_per_level(d + 1, 0);
  std::uint64_t straddle = 0;

  struct Item {
    std::size_t k;
    BigInt cx, cy;  // cell center at scale k
  };
  std::vector<Item> stack{{0, 0, 0}};
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    const BigInt R = LS / rs.scale(it.k);
    const BigInt dx = it.cx * R - P.x, dy = it.cy * R - P.y;
    const BigInt adx = abs(dx), ady = abs(dy);
    const BigInt mx = adx + R, my = ady + R;
    const BigInt nx = adx > R ? BigInt(adx - R) : BigInt(0), ny = ady > R ? BigInt(ady - R) : BigInt(0);
    if ((mx * mx + my * my) * rd2 < rhs) {
      ++inside_per_level[it.k];
      continue;
    }
    if ((nx * nx + ny * ny) * rd2 >= rhs) continue;
    if (it.k == d) {
      ++straddle;
      continue;
    }
    const int l = rs.ratio(it.k + 1);
    for (const Letter& a : enumerate_letters(l)) {
      BigInt x = it.cx * l, y = it.cy * l;
      if (!a.is_center()) {
        x += 2 * a.step * kCorner[static_cast<std::size_t>(a.direction)][0];
        y += 2 * a.step * kCorner[static_cast<std::size_t>(a.direction)][1];
      }
      stack.push_back({it.k + 1, std::move(x), std::move(y)});
    }
  }
  Rational lower = 0;
  for (std::size_t k = 0; k <= d; ++k) {
    out.inside += inside_per_level[k];
    lower += Rational(inside_per_level[k]) / rs.word_count(k);
  }
  out.straddling = straddle;
  out.lower = lower;
  out.upper = lower + Rational(straddle) / rs.word_count(d);
  return out;
}

struct DerivedConstants {
  double epsilon_p = 0.0;
  std::map<int, double> alpha;  // log(2l-1)/log l
  std::map<int, double> beta;   // p - 1 + alpha_l
  std::map<int, double> t;      // (2l-1) l^{p-1}
  double inf_alpha = 0.0, sup_alpha = 0.0;
  double inf_t = 0.0, sup_t = 0.0;
  double inf_beta = 0.0, sup_beta = 0.0;
};

inline double alpha_of(int l) { return std::log(2.0 * l - 1.0) / std::log(static_cast<double>(l)); }

inline DerivedConstants derived_constants(const std::set<int>& alphabet, const Exponent& p) {
  if (alphabet.empty()) throw InvalidArgument("empty alphabet");
  DerivedConstants c;
  const double pv = p.value();
  for (int l : alphabet) {
    RatioGenerator::check_ratio(l);
    c.alpha[l] = alpha_of(l);
    c.beta[l] = pv - 1.0 + c.alpha[l];
    c.t[l] = (2.0 * l - 1.0) * std::pow(static_cast<double>(l), pv - 1.0);
  }
  auto range = [](const std::map<int, double>& m, double& lo, double& hi) {
    lo = m.begin()->second;
    hi = lo;
    for (auto& [k, v] : m) lo = std::min(lo, v), hi = std::max(hi, v);
  };
  range(c.alpha, c.inf_alpha, c.sup_alpha);
  range(c.beta, c.inf_beta, c.sup_beta);
  range(c.t, c.inf_t, c.sup_t);
  c.epsilon_p = 1.0 / (1.0 + (pv - 1.0) / c.sup_alpha);
  return c;
}

inline DerivedConstants derived_constants(const RatioSequence& rs) {
  return derived_constants(rs.generator().alphabet(), rs.p());
}

// Constants of the two-sided scaling law psi(R)/psi(r) in [c1 (R/r)^{inf alpha}, c2 (R/r)^{sup alpha}].
struct ScalingLaw {
  double c1, c2, inf_alpha, sup_alpha;
  double lower(double R_over_r) const { return c1 * std::pow(R_over_r, inf_alpha); }
  double upper(double R_over_r) const { return c2 * std::pow(R_over_r, sup_alpha); }
};

inline ScalingLaw scaling_law(const std::set<int>& alphabet) {
  const auto c = derived_constants(alphabet, Exponent(2));
  const double L = *alphabet.rbegin();
  return {std::pow(L, -c.inf_alpha), std::pow(L, c.sup_alpha), c.inf_alpha, c.sup_alpha};
}

}  // namespace vicsek
