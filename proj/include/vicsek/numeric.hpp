#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "vicsek/errors.hpp"

namespace vicsek {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using i128 = __int128;

inline BigInt to_big(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 m = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1u
                            : static_cast<unsigned __int128>(v);
  BigInt r = static_cast<std::uint64_t>(m >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(m);
  return neg ? BigInt(-r) : r;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(const BigInt& q) { return q.convert_to<double>(); }

inline BigInt ipow(BigInt base, unsigned e) {
  BigInt r = 1;
  while (e) {
    if (e & 1u) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

inline Rational rpow(const Rational& base, int e) {
  if (e < 0) return Rational(1) / rpow(base, -e);
  return Rational(ipow(boost::multiprecision::numerator(base), static_cast<unsigned>(e)),
                  ipow(boost::multiprecision::denominator(base), static_cast<unsigned>(e)));
}

inline std::string to_string(const Rational& q) {
  auto num = boost::multiprecision::numerator(q);
  auto den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

// |d|^p in 128 bits; false on overflow.
inline bool abs_pow_i128(std::int64_t d, int p, i128& out) {
  i128 base = d < 0 ? -static_cast<i128>(d) : static_cast<i128>(d);
  i128 r = 1;
  for (int k = 0; k < p; ++k) {
    if (__builtin_mul_overflow(r, base, &r)) return false;
  }
  out = r;
  return true;
}

// Integer sum that spills into a BigInt instead of overflowing.
class ExactSum {
 public:
  void add(i128 term) {
    i128 r;
    if (__builtin_add_overflow(acc_, term, &r)) {
      big_ += to_big(acc_);
      acc_ = term;
    } else {
      acc_ = r;
    }
  }
  void add(const BigInt& term) { big_ += term; }
  void add_abs_pow(std::int64_t d, int p) {
    i128 t;
    if (abs_pow_i128(d, p, t)) {
      add(t);
    } else {
      BigInt b = d < 0 ? BigInt(-BigInt(d)) : BigInt(d);
      big_ += ipow(b, static_cast<unsigned>(p));
    }
  }
  void add(const ExactSum& o) {
    big_ += o.big_;
    add(o.acc_);
  }
  BigInt value() const { return big_ + to_big(acc_); }

 private:
  i128 acc_ = 0;
  BigInt big_ = 0;
};

// Neumaier summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = s_ + x;
    if (std::fabs(s_) >= std::fabs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// An exponent held as an exact positive rational num/den.
class Exponent {
 public:
  Exponent() : num_(2), den_(1) {}
  Exponent(std::int64_t num, std::int64_t den = 1) {
    if (den == 0) throw InvalidArgument("exponent: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    num_ = num / g;
    den_ = den / g;
  }

  // Accepts "2", "3/2", "1.5".
  static Exponent parse(std::string_view s) {
    auto bad = [&] { return InvalidArgument("cannot parse exponent '" + std::string(s) + "'"); };
    if (s.empty()) throw bad();
    std::int64_t num = 0, den = 1;
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      ++i;
    }
    auto digits = [&](std::int64_t& v, std::int64_t* scale) {
      std::size_t start = i;
      while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        if (v > (INT64_C(1) << 50)) throw bad();
        v = v * 10 + (s[i] - '0');
        if (scale) *scale *= 10;
        ++i;
      }
      return i > start;
    };
    if (!digits(num, nullptr)) throw bad();
    if (i < s.size() && s[i] == '/') {
      ++i;
      den = 0;
      if (!digits(den, nullptr) || den == 0) throw bad();
    } else if (i < s.size() && s[i] == '.') {
      ++i;
      std::int64_t frac = 0, scale = 1;
      digits(frac, &scale);
      num = num * scale + frac;
      den = scale;
    }
    if (i != s.size()) throw bad();
    return Exponent(neg ? -num : num, den);
  }

  static Exponent from_double(double v) {
    for (std::int64_t den = 1; den <= 1000000; den *= 10) {
      const double n = v * static_cast<double>(den);
      if (std::fabs(n - std::round(n)) < 1e-9 * std::max(1.0, std::fabs(n)))
        return Exponent(static_cast<std::int64_t>(std::llround(n)), den);
    }
    throw InvalidArgument("exponent is not a short decimal: " + std::to_string(v));
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const { return den_ == 1; }
  int integer() const { return static_cast<int>(num_); }
  Rational rational() const { return Rational(num_, den_); }
  std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  friend bool operator==(const Exponent& a, const Exponent& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

 private:
  std::int64_t num_;
  std::int64_t den_;
};

// |x|^p for a real p; exact powers for small integers so that integer-p float
// energies agree with their rational counterparts as closely as possible.
inline double abs_pow(double x, double p) {
  const double a = std::fabs(x);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

}  // namespace vicsek
