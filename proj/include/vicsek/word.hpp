#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vicsek/errors.hpp"
#include "vicsek/ratio_sequence.hpp"

namespace vicsek {

// sqrt(2)*q_j for j = 0..4.
inline constexpr std::array<std::array<int, 2>, 5> kCorner = {{{0, 0}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};

// Center when direction == 0, otherwise Arm(direction, step).
struct Letter {
  int direction = 0;
  int step = 0;

  static Letter center() { return {}; }
  static Letter arm(int j, int m) { return {j, m}; }
  bool is_center() const { return direction == 0; }
  friend bool operator==(const Letter&, const Letter&) = default;
};

inline std::vector<Letter> enumerate_letters(int l) {
  RatioGenerator::check_ratio(l);
  std::vector<Letter> out;
  out.reserve(static_cast<std::size_t>(2 * l - 1));
  out.push_back(Letter::center());
  const int h = (l - 1) / 2;
  for (int j = 1; j <= 4; ++j)
    for (int m = 1; m <= h; ++m) out.push_back(Letter::arm(j, m));
  return out;
}

// Position of the letter in enumerate_letters(l).
inline int letter_digit(const Letter& a, int l) {
  if (a.is_center()) return 0;
  const int h = (l - 1) / 2;
  if (a.direction < 1 || a.direction > 4 || a.step < 1 || a.step > h)
    throw InvalidArgument("letter Arm(" + std::to_string(a.direction) + "," + std::to_string(a.step) +
                          ") not in alphabet of l=" + std::to_string(l));
  return 1 + (a.direction - 1) * h + (a.step - 1);
}

inline Letter letter_from_digit(int digit, int l) {
  if (digit == 0) return Letter::center();
  const int h = (l - 1) / 2;
  return Letter::arm(1 + (digit - 1) / h, 1 + (digit - 1) % h);
}

struct Word {
  std::vector<Letter> letters;

  std::size_t level() const { return letters.size(); }
  friend bool operator==(const Word&, const Word&) = default;
};

// "c" for Center, "j:m" for arms, joined by '.', "-" for the empty word.
inline std::string to_string(const Word& w) {
  if (w.letters.empty()) return "-";
  std::string s;
  for (std::size_t k = 0; k < w.letters.size(); ++k) {
    if (k) s += '.';
    const Letter& a = w.letters[k];
    s += a.is_center() ? std::string("c") : std::to_string(a.direction) + ":" + std::to_string(a.step);
  }
  return s;
}

inline void check_word(const RatioSequence& rs, const Word& w) {
  if (w.level() > rs.depth())
    throw DepthError("word of level " + std::to_string(w.level()) + " beyond depth " + std::to_string(rs.depth()));
  for (std::size_t k = 0; k < w.level(); ++k) letter_digit(w.letters[k], rs.ratio(k + 1));
}

inline std::vector<Word> children(const RatioSequence& rs, const Word& w) {
  check_word(rs, w);
  if (w.level() >= rs.depth())
    throw DepthError("word " + to_string(w) + " is at maximal depth " + std::to_string(rs.depth()));
  std::vector<Word> out;
  for (const Letter& a : enumerate_letters(rs.ratio(w.level() + 1))) {
    Word c = w;
    c.letters.push_back(a);
    out.push_back(std::move(c));
  }
  return out;
}

// Lexicographic (mixed-radix) index of w among W_n, n = level(w).
inline std::uint64_t word_index(const RatioSequence& rs, const Word& w) {
  check_word(rs, w);
  std::uint64_t idx = 0;
  for (std::size_t k = 0; k < w.level(); ++k) {
    const int l = rs.ratio(k + 1);
    idx = idx * static_cast<std::uint64_t>(2 * l - 1) + static_cast<std::uint64_t>(letter_digit(w.letters[k], l));
  }
  return idx;
}

inline Word word_from_index(const RatioSequence& rs, std::size_t level, std::uint64_t idx) {
  Word w;
  w.letters.resize(level);
  for (std::size_t k = level; k-- > 0;) {
    const int l = rs.ratio(k + 1);
    const auto radix = static_cast<std::uint64_t>(2 * l - 1);
    w.letters[k] = letter_from_digit(static_cast<int>(idx % radix), l);
    idx /= radix;
  }
  if (idx != 0) throw LookupError("word index out of range at level " + std::to_string(level));
  return w;
}

// All words of level n in lexicographic order.
inline std::vector<Word> all_words(const RatioSequence& rs, std::size_t n) {
  const auto count = rs.word_count(n).convert_to<std::uint64_t>();
  std::vector<Word> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(word_from_index(rs, n, i));
  return out;
}

// The point sqrt(2) L_n F_w(q_corner), n = level(w).
struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::size_t scale = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

inline LatticePoint point_of_word(const RatioSequence& rs, const Word& w, int corner = 0) {
  if (corner < 0 || corner > 4) throw InvalidArgument("corner index must be in 0..4, got " + std::to_string(corner));
  check_word(rs, w);
  const std::size_t n = w.level();
  rs.scale_i64(n);
  LatticePoint pt{0, 0, n};
  for (std::size_t k = 0; k < n; ++k) {
    const int l = rs.ratio(k + 1);
    pt.x *= l;
    pt.y *= l;
    const Letter& a = w.letters[k];
    if (!a.is_center()) {
      pt.x += 2 * a.step * kCorner[static_cast<std::size_t>(a.direction)][0];
      pt.y += 2 * a.step * kCorner[static_cast<std::size_t>(a.direction)][1];
    }
  }
  pt.x += kCorner[static_cast<std::size_t>(corner)][0];
  pt.y += kCorner[static_cast<std::size_t>(corner)][1];
  return pt;
}

// Same point at a finer scale.
inline LatticePoint rescale(const RatioSequence& rs, const LatticePoint& p, std::size_t to_scale) {
  if (to_scale < p.scale) throw ScaleMismatch("rescale only refines");
  LatticePoint q = p;
  for (std::size_t k = p.scale + 1; k <= to_scale; ++k) {
    q.x *= rs.ratio(k);
    q.y *= rs.ratio(k);
  }
  q.scale = to_scale;
  return q;
}

// Squared Euclidean distance of two points at a common scale.
inline Rational squared_distance(const RatioSequence& rs, const LatticePoint& a, const LatticePoint& b) {
  if (a.scale != b.scale) throw ScaleMismatch("points at scales " + std::to_string(a.scale) + " and " + std::to_string(b.scale));
  const BigInt dx = BigInt(a.x) - b.x, dy = BigInt(a.y) - b.y;
  const BigInt& L = rs.scale(a.scale);
  return Rational(dx * dx + dy * dy, 2 * L * L);
}

// d(a,b) < rho_n for points at a common scale m >= n.
inline bool within_open_ball(const RatioSequence& rs, const LatticePoint& a, const LatticePoint& b, std::size_t n) {
  if (a.scale != b.scale) throw ScaleMismatch("points at scales " + std::to_string(a.scale) + " and " + std::to_string(b.scale));
  if (a.scale < n) throw ScaleMismatch("point scale " + std::to_string(a.scale) + " coarser than ball scale " + std::to_string(n));
  const BigInt dx = BigInt(a.x) - b.x, dy = BigInt(a.y) - b.y;
  const BigInt& Ln = rs.scale(n);
  const BigInt& Lm = rs.scale(a.scale);
  return (dx * dx + dy * dy) * Ln * Ln < 8 * Lm * Lm;
}

}  // namespace vicsek
