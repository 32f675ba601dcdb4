#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vicsek/errors.hpp"
#include "vicsek/ratio_sequence.hpp"

namespace vicsek {

// Asymptotic regime of a real sequence limit (liminf or limsup).
enum class Extended { minus_infinity, finite, plus_infinity };

struct Regime {
  Extended liminf_eta = Extended::finite;
  Extended limsup_eta = Extended::finite;
};

enum class HausdorffMeasure { zero, positive_finite, infinite };

inline const char* to_string(HausdorffMeasure h) {
  switch (h) {
    case HausdorffMeasure::zero: return "zero";
    case HausdorffMeasure::positive_finite: return "positive-finite";
    case HausdorffMeasure::infinite: return "infinite";
  }
  return "";
}

struct HausdorffDiagnostics {
  int a = 3, b = 5;
  double theta = 0.0;
  double alpha = 0.0;
  double f_prime = 0.0;  // d alpha / d theta at theta
  // Indexed by n = 1..prefix length (entry 0 is n = 1).
  std::vector<long long> count_a, count_b;
  std::vector<double> theta_n, eta_n, log_xi_n;
  HausdorffMeasure measure = HausdorffMeasure::positive_finite;
  bool ahlfors_regular = true;
  bool non_self_similar_1 = false;  // liminf eta = +inf (a < b)
  bool non_self_similar_2 = false;  // liminf finite, limsup = +inf (a < b)
  bool non_self_similarity_applicable = false;
  std::string note = "prefix trends are diagnostic, not a limit";
};

inline double hausdorff_alpha(int a, int b, double theta) {
  return (theta * std::log(2.0 * a - 1) + std::log(2.0 * b - 1)) / (theta * std::log(a) + std::log(b));
}

// prefix holds l_1..l_n, each equal to a or b.
inline HausdorffDiagnostics hausdorff_report(int a, int b, const std::vector<int>& prefix, double theta, Regime regime) {
  RatioGenerator::check_ratio(a);
  RatioGenerator::check_ratio(b);
  if (a == b) throw DegenerateInput("a == b: single ratio, the set is self-similar");
  if (prefix.empty()) throw InvalidArgument("empty prefix");
  if (!(theta >= 0.0) || std::isinf(theta)) throw InvalidArgument("theta must lie in [0, inf)");

  HausdorffDiagnostics d;
  d.a = a;
  d.b = b;
  d.theta = theta;
  d.alpha = hausdorff_alpha(a, b, theta);
  const double la = std::log(a), lb = std::log(b), l2a = std::log(2.0 * a - 1), l2b = std::log(2.0 * b - 1);
  d.f_prime = (l2a * lb - la * l2b) / ((theta * la + lb) * (theta * la + lb));

  const std::size_t N = prefix.size();
  d.count_a.reserve(N);
  d.count_b.reserve(N);
  d.theta_n.reserve(N);
  d.eta_n.reserve(N);
  d.log_xi_n.reserve(N);
  long long A = 0, B = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < N; ++i) {
    if (prefix[i] == a)
      ++A;
    else if (prefix[i] == b)
      ++B;
    else
      throw InvalidArgument("prefix entry " + std::to_string(prefix[i]) + " is neither a nor b");
    const double n = static_cast<double>(i + 1);
    d.count_a.push_back(A);
    d.count_b.push_back(B);
    const double th = B == 0 ? inf : static_cast<double>(A) / static_cast<double>(B);
    d.theta_n.push_back(th);
    d.eta_n.push_back(B == 0 ? inf : n * (th - theta));
    // log xi_n = alpha log rho_n - log psi(rho_n)
    const double log_rho = std::log(2.0) - (A * la + B * lb);
    d.log_xi_n.push_back(d.alpha * log_rho + (A * l2a + B * l2b));
  }

  if (a < b) {
    switch (regime.liminf_eta) {
      case Extended::finite: d.measure = HausdorffMeasure::positive_finite; break;
      case Extended::minus_infinity: d.measure = HausdorffMeasure::zero; break;
      case Extended::plus_infinity: d.measure = HausdorffMeasure::infinite; break;
    }
    d.non_self_similarity_applicable = true;
    d.non_self_similar_1 = regime.liminf_eta == Extended::plus_infinity;
    d.non_self_similar_2 = regime.liminf_eta == Extended::finite && regime.limsup_eta == Extended::plus_infinity;
  } else {
    switch (regime.limsup_eta) {
      case Extended::finite: d.measure = HausdorffMeasure::positive_finite; break;
      case Extended::plus_infinity: d.measure = HausdorffMeasure::zero; break;
      case Extended::minus_infinity: d.measure = HausdorffMeasure::infinite; break;
    }
  }
  d.ahlfors_regular = regime.liminf_eta == Extended::finite && regime.limsup_eta == Extended::finite;
  return d;
}

}  // namespace vicsek
