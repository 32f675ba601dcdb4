#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vicsek/errors.hpp"
#include "vicsek/numeric.hpp"

namespace vicsek {

// Rule producing l_k for k >= 1.  Explicit lists are finite; the named rules extend forever.
class RatioGenerator {
 public:
  enum class Kind { explicit_list, constant, alternating, example_sequence, blocks };

  static RatioGenerator explicit_list(std::vector<int> ratios) {
    for (int l : ratios) check_ratio(l);
    RatioGenerator g(Kind::explicit_list);
    g.list_ = std::move(ratios);
    return g;
  }
  static RatioGenerator constant(int l) {
    check_ratio(l);
    RatioGenerator g(Kind::constant);
    g.a_ = g.b_ = l;
    return g;
  }
  // a, b, a, b, ...
  static RatioGenerator alternating(int a, int b) { return pair(Kind::alternating, a, b); }
  // (k+1) copies of a then k copies of b, k = 1, 2, ...
  static RatioGenerator example_sequence(int a, int b) { return pair(Kind::example_sequence, a, b); }
  // k copies of a then k copies of b, k = 1, 2, ...
  static RatioGenerator blocks(int a, int b) { return pair(Kind::blocks, a, b); }

  Kind kind() const { return kind_; }
  bool finite() const { return kind_ == Kind::explicit_list; }
  std::size_t length() const { return finite() ? list_.size() : SIZE_MAX; }

  // Ratios l_1..l_count.
  std::vector<int> take(std::size_t count) const {
    if (finite() && count > list_.size())
      throw DepthError("explicit ratio list has only " + std::to_string(list_.size()) + " entries, " +
                       std::to_string(count) + " requested");
    std::vector<int> out;
    out.reserve(count);
    switch (kind_) {
      case Kind::explicit_list:
        out.assign(list_.begin(), list_.begin() + static_cast<std::ptrdiff_t>(count));
        break;
      case Kind::constant:
        out.assign(count, a_);
        break;
      case Kind::alternating:
        for (std::size_t k = 0; k < count; ++k) out.push_back(k % 2 == 0 ? a_ : b_);
        break;
      case Kind::example_sequence:
      case Kind::blocks: {
        const std::size_t extra = kind_ == Kind::example_sequence ? 1 : 0;
        for (std::size_t k = 1; out.size() < count; ++k) {
          for (std::size_t i = 0; i < k + extra && out.size() < count; ++i) out.push_back(a_);
          for (std::size_t i = 0; i < k && out.size() < count; ++i) out.push_back(b_);
        }
        break;
      }
    }
    return out;
  }

  // Letters l that occur for k >= 1.
  std::set<int> alphabet() const {
    if (finite()) return std::set<int>(list_.begin(), list_.end());
    return {a_, b_};
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::explicit_list: {
        std::string s = "explicit(";
        for (std::size_t i = 0; i < list_.size(); ++i) s += (i ? "," : "") + std::to_string(list_[i]);
        return s + ")";
      }
      case Kind::constant:
        return "constant(" + std::to_string(a_) + ")";
      case Kind::alternating:
        return "alternating(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
      case Kind::example_sequence:
        return "example_sequence(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
      case Kind::blocks:
        return "blocks(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
    }
    return {};
  }

  static void check_ratio(int l) {
    if (l < 3 || l % 2 == 0) throw InvalidRatio("ratio must be an odd integer >= 3, got " + std::to_string(l));
  }

 private:
  explicit RatioGenerator(Kind k) : kind_(k) {}
  static RatioGenerator pair(Kind k, int a, int b) {
    check_ratio(a);
    check_ratio(b);
    RatioGenerator g(k);
    g.a_ = a;
    g.b_ = b;
    return g;
  }

  Kind kind_;
  int a_ = 3;
  int b_ = 3;
  std::vector<int> list_;
};

// l_1..l_N plus p and beta*.  l_0 = 1 by convention.
class RatioSequence {
 public:
  RatioSequence(std::vector<int> ratios, Exponent p = Exponent(2), double beta_star = 1.0)
      : RatioSequence(RatioGenerator::explicit_list(std::move(ratios)), 0, p, beta_star, true) {}

  RatioSequence(RatioGenerator gen, std::size_t depth, Exponent p = Exponent(2), double beta_star = 1.0)
      : RatioSequence(std::move(gen), depth, p, beta_star, false) {}

  const RatioGenerator& generator() const { return gen_; }
  std::size_t depth() const { return ratios_.size(); }
  const Exponent& p() const { return p_; }
  double beta_star() const { return beta_star_; }

  // l_k; l_0 = 1.
  int ratio(std::size_t k) const {
    if (k == 0) return 1;
    if (k > ratios_.size())
      throw DepthError("ratio l_" + std::to_string(k) + " beyond configured depth " + std::to_string(ratios_.size()));
    return ratios_[k - 1];
  }
  const std::vector<int>& ratios() const { return ratios_; }

  // Same generator, p and beta*, different depth.
  RatioSequence with_depth(std::size_t depth) const {
    return RatioSequence(gen_, depth, p_, beta_star_, false);
  }
  RatioSequence with_p(Exponent p) const { return RatioSequence(gen_, depth(), p, beta_star_, false); }
  RatioSequence with_beta_star(double b) const { return RatioSequence(gen_, depth(), p_, b, false); }

  // L_n = prod_{k<=n} l_k.
  const BigInt& scale(std::size_t n) const {
    check(n);
    return scale_[n];
  }
  // #W_n = prod_{k<=n} (2 l_k - 1).
  const BigInt& word_count(std::size_t n) const {
    check(n);
    return words_[n];
  }
  std::int64_t scale_i64(std::size_t n) const {
    const BigInt& s = scale(n);
    if (s > BigInt(INT64_C(1) << 40)) throw ResourceError("scale L_" + std::to_string(n) + " exceeds int64 coordinate range", s.str());
    return s.convert_to<std::int64_t>();
  }

  // Letters occurring among l_1..l_depth.
  std::set<int> alphabet() const { return std::set<int>(ratios_.begin(), ratios_.end()); }
  int sup_ratio() const { return ratios_.empty() ? 1 : *std::max_element(ratios_.begin(), ratios_.end()); }
  int inf_ratio() const { return ratios_.empty() ? 1 : *std::min_element(ratios_.begin(), ratios_.end()); }

 private:
  RatioSequence(RatioGenerator gen, std::size_t depth, Exponent p, double beta_star, bool whole_list)
      : gen_(std::move(gen)), p_(p), beta_star_(beta_star) {
    if (p_.num() <= p_.den()) throw InvalidArgument("p must be > 1, got " + p_.str());
    if (!(beta_star_ > 0.0)) throw InvalidArgument("beta_star must be > 0");
    ratios_ = gen_.take(whole_list ? gen_.length() : depth);
    scale_.reserve(ratios_.size() + 1);
    words_.reserve(ratios_.size() + 1);
    scale_.push_back(1);
    words_.push_back(1);
    for (int l : ratios_) {
      scale_.push_back(scale_.back() * l);
      words_.push_back(words_.back() * (2 * l - 1));
    }
  }
  void check(std::size_t n) const {
    if (n > ratios_.size())
      throw DepthError("level " + std::to_string(n) + " beyond configured depth " + std::to_string(ratios_.size()));
  }

  RatioGenerator gen_;
  Exponent p_;
  double beta_star_;
  std::vector<int> ratios_;
  std::vector<BigInt> scale_;
  std::vector<BigInt> words_;
};

}  // namespace vicsek
