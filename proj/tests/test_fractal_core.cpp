#include <gtest/gtest.h>

#include <map>
#include <set>

#include "vicsek/level.hpp"

using namespace vicsek;

namespace {

// F_w(q_corner) * sqrt(2), evaluated as nested contractions in rationals.
std::pair<Rational, Rational> oracle_point(const RatioSequence& rs, const Word& w, int corner) {
  Rational x = kCorner[corner][0], y = kCorner[corner][1];
  for (std::size_t k = w.level(); k-- > 0;) {
    const int l = rs.ratio(k + 1);
    x /= l;
    y /= l;
    const Letter& a = w.letters[k];
    if (!a.is_center()) {
      x += Rational(2 * a.step, l) * kCorner[a.direction][0];
      y += Rational(2 * a.step, l) * kCorner[a.direction][1];
    }
  }
  return {x, y};
}

// Vertices and edges found by distance search over all cell points.
std::pair<std::size_t, std::size_t> oracle_counts(const RatioSequence& rs, std::size_t n) {
  std::set<std::pair<std::int64_t, std::int64_t>> pts;
  for (const Word& w : all_words(rs, n))
    for (int j = 0; j <= 4; ++j) {
      auto p = point_of_word(rs, w, j);
      pts.insert({p.x, p.y});
    }
  std::vector<std::pair<std::int64_t, std::int64_t>> v(pts.begin(), pts.end());
  std::size_t edges = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t k = i + 1; k < v.size(); ++k) {
      const auto dx = v[i].first - v[k].first, dy = v[i].second - v[k].second;
      if (dx * dx + dy * dy == 2) ++edges;
    }
  return {v.size(), edges};
}

RatioSequence seq(std::vector<int> l) { return RatioSequence(std::move(l)); }

}  // namespace

TEST(Letters, CountsAndCenter) {
  EXPECT_EQ(enumerate_letters(3).size(), 5u);
  EXPECT_EQ(enumerate_letters(5).size(), 9u);
  EXPECT_EQ(enumerate_letters(11).size(), 21u);
  auto ls = enumerate_letters(3);
  EXPECT_EQ(std::count(ls.begin(), ls.end(), Letter::center()), 1);
  for (int l : {3, 5, 7}) {
    auto a = enumerate_letters(l);
    for (std::size_t d = 0; d < a.size(); ++d) {
      EXPECT_EQ(letter_digit(a[d], l), static_cast<int>(d));
      EXPECT_EQ(letter_from_digit(static_cast<int>(d), l), a[d]);
    }
  }
}

TEST(Letters, InvalidRatio) {
  EXPECT_THROW(enumerate_letters(4), InvalidRatio);
  EXPECT_THROW(enumerate_letters(1), InvalidRatio);
  EXPECT_THROW(seq({3, 6}), InvalidRatio);
}

TEST(PointOfWord, Examples) {
  auto rs = seq({3, 5});
  EXPECT_EQ(point_of_word(rs, Word{}, 0), (LatticePoint{0, 0, 0}));
  EXPECT_EQ(point_of_word(rs, Word{}, 1), (LatticePoint{1, 1, 0}));
  EXPECT_EQ(point_of_word(rs, Word{{Letter::arm(1, 1)}}, 0), (LatticePoint{2, 2, 1}));
  EXPECT_THROW(point_of_word(rs, Word{}, 5), InvalidArgument);
}

TEST(PointOfWord, MatchesContractionOracle) {
  auto rs = seq({3, 5, 3});
  for (std::size_t n = 0; n <= 3; ++n)
    for (const Word& w : all_words(rs, n))
      for (int j = 0; j <= 4; ++j) {
        auto p = point_of_word(rs, w, j);
        auto [ox, oy] = oracle_point(rs, w, j);
        Rational L(rs.scale(n));
        ASSERT_EQ(Rational(p.x), ox * L) << to_string(w);
        ASSERT_EQ(Rational(p.y), oy * L) << to_string(w);
      }
}

TEST(BuildLevel, Counts) {
  EXPECT_EQ(build_level(seq({3}), 0).vertex_count(), 5u);
  EXPECT_EQ(build_level(seq({3}), 0).edge_count(), 4u);
  EXPECT_EQ(build_level(seq({3}), 1).vertex_count(), 21u);
  EXPECT_EQ(build_level(seq({3}), 1).edge_count(), 20u);
  EXPECT_EQ(build_level(seq({3, 5}), 2).vertex_count(), 181u);
  EXPECT_EQ(build_level(seq({3, 5}), 2).edge_count(), 180u);
}

TEST(BuildLevel, MatchesDistanceSearchOracle) {
  for (auto rs : {seq({3, 3}), seq({5, 3}), seq({3, 5})})
    for (std::size_t n = 0; n <= 2; ++n) {
      auto g = build_level(rs, n);
      auto [v, e] = oracle_counts(rs, n);
      EXPECT_EQ(g.vertex_count(), v);
      EXPECT_EQ(g.edge_count(), e);
    }
}

TEST(BuildLevel, Invariants) {
  auto rs = seq({3, 5, 3});
  for (std::size_t n = 0; n <= 3; ++n) {
    auto g = build_level(rs, n);
    const auto W = rs.word_count(n).convert_to<std::size_t>();
    EXPECT_EQ(g.vertex_count(), 4 * W + 1);
    EXPECT_EQ(g.bfs_order().size(), g.vertex_count());
    for (const Edge& e : g.edges()) {
      const auto dx = g.x(e.head) - g.x(e.tail), dy = g.y(e.head) - g.y(e.tail);
      EXPECT_EQ(dx * dx + dy * dy, 2);
      EXPECT_EQ(g.depth(e.head), g.depth(e.tail) + 1);
    }
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      EXPECT_GE(g.multiplicity(v), 1);
      EXPECT_LE(g.multiplicity(v), 2);
    }
  }
}

TEST(BuildLevel, Refinement) {
  auto rs = seq({3, 5, 3});
  for (std::size_t n = 0; n < 3; ++n) {
    auto g = build_level(rs, n), h = build_level(rs, n + 1);
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      auto p = rescale(rs, g.point(v), n + 1);
      EXPECT_TRUE(h.find_vertex(p.x, p.y).has_value());
    }
  }
}

TEST(BuildLevel, OwnedRangesContiguous) {
  auto rs = seq({3, 5, 3});
  auto g = build_level(rs, 3);
  for (std::size_t k = 0; k <= 3; ++k) {
    const auto W = rs.word_count(k).convert_to<std::uint64_t>();
    VertexId prev = 0;
    for (CellId c = 0; c < W; ++c) {
      EXPECT_EQ(g.owned_begin(k, c), prev);
      prev = g.owned_end(k, c);
      const auto ctr = rescale(rs, point_of_word(rs, word_from_index(rs, k, c)), 3);
      const std::int64_t R = rs.scale_i64(3) / rs.scale_i64(k);
      for (VertexId v = g.owned_begin(k, c); v < g.owned_end(k, c); ++v) {
        EXPECT_LE(std::abs(g.x(v) - ctr.x), R);
        EXPECT_LE(std::abs(g.y(v) - ctr.y), R);
        EXPECT_EQ(g.ancestor(g.owner_cell(v), k), c);
      }
    }
    EXPECT_EQ(prev, g.vertex_count());
  }
}

TEST(BuildLevel, BudgetGuard) {
  RatioSequence rs(RatioGenerator::alternating(3, 5), 12);
  try {
    build_level(rs, 12);
    FAIL();
  } catch (const ResourceError& e) {
    EXPECT_EQ(e.required(), rs.word_count(12).str());
    EXPECT_NE(std::string(e.what()).find(rs.word_count(12).str()), std::string::npos);
  }
}

TEST(Children, CountAndContainment) {
  auto rs = seq({3, 5, 3});
  EXPECT_EQ(children(rs, Word{}).size(), 5u);
  Word w{{Letter::arm(2, 1)}};
  auto ch = children(rs, w);
  EXPECT_EQ(ch.size(), 9u);
  const auto c = rescale(rs, point_of_word(rs, w), 2);
  for (const Word& v : ch)
    for (int j = 0; j <= 4; ++j) {
      auto p = point_of_word(rs, v, j);
      EXPECT_LE(std::abs(p.x - c.x), 5);
      EXPECT_LE(std::abs(p.y - c.y), 5);
    }
  Word deep{{Letter::center(), Letter::center(), Letter::center()}};
  EXPECT_THROW(children(rs, deep), DepthError);
}

TEST(Geodesic, Examples) {
  auto rs = seq({3, 5});
  auto g = build_level(rs, 0);
  auto id = [&](int j) { return *g.find_vertex(kCorner[j][0], kCorner[j][1]); };
  EXPECT_EQ(geodesic_distance(g, id(1), id(1)), 0);
  EXPECT_EQ(geodesic_distance(g, id(0), id(1)), 1);
  EXPECT_EQ(geodesic_distance(g, id(1), id(2)), 2);
  EXPECT_THROW(geodesic_distance(g, 0, 99), LookupError);
  auto h = build_level(rs, 2);
  for (VertexId a = 0; a < h.vertex_count(); a += 7)
    for (VertexId b = 0; b < h.vertex_count(); b += 5) {
      auto path = geodesic_path(h, a, b);
      EXPECT_EQ(path.size(), geodesic_steps(h, a, b) + 1u);
      EXPECT_EQ(geodesic_distance(h, a, b), geodesic_distance(h, b, a));
      // Euclidean distance never exceeds the tree distance.
      EXPECT_LE(squared_distance(rs, h.point(a), h.point(b)), geodesic_distance(h, a, b) * geodesic_distance(h, a, b));
    }
}

TEST(OpenBall, Examples) {
  auto rs = seq({3});
  LatticePoint o{0, 0, 1}, p{2, 2, 1};
  EXPECT_TRUE(within_open_ball(rs, p, p, 1));
  EXPECT_FALSE(within_open_ball(rs, o, p, 1));
  EXPECT_TRUE(within_open_ball(rs, o, p, 0));
  EXPECT_THROW(within_open_ball(rs, o, LatticePoint{0, 0, 0}, 0), ScaleMismatch);
}
