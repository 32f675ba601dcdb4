#include <gtest/gtest.h>

#include "vicsek/test_functions.hpp"
#include "vicsek/structural_checks.hpp"

using namespace vicsek;

namespace {

double brute_morrey(const VicsekLevel& g, const std::vector<double>& val, double p) {
  double best = 0;
  const double L = static_cast<double>(g.scale());
  for (VertexId x = 0; x < g.vertex_count(); ++x)
    for (VertexId y = x + 1; y < g.vertex_count(); ++y) {
      const double d = std::sqrt(to_double(squared_distance(g.ratios(), g.point(x), g.point(y))));
      (void)L;
      best = std::max(best, std::pow(std::fabs(val[x] - val[y]), p) / std::pow(d, p - 1));
    }
  return best;
}

Exponent pick(int i) { return i % 3 == 0 ? Exponent(3, 2) : i % 3 == 1 ? Exponent(2) : Exponent(3); }

}  // namespace

TEST(Morrey, BranchAndBoundMatchesAllPairs) {
  Hierarchy h(RatioSequence({3, 5, 3}), 3);
  SplitMix64 rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t N = 1 + trial % 3;
    const AffineFunction u = random_affine(h, trial % 2, rng);
    const Samples s = sample(u, h, N);
    for (const Exponent& p : {Exponent(3, 2), Exponent(2), Exponent(3)}) {
      const double bb = morrey_numerator(h.level(N), s.values, p);
      const double bf = brute_morrey(h.level(N), s.values, p.value());
      EXPECT_NEAR(bb, bf, 1e-12 * bf) << "N=" << N << " p=" << p.str();
    }
  }
}

TEST(Structural, ConstantFunction) {
  Hierarchy h(RatioSequence({3, 3}), 2);
  const auto r = structural_checks(h, constant_function(h, 3), constant_function(h, -1), Exponent(2), 2);
  EXPECT_TRUE(r.all_ok());
  EXPECT_EQ(r.product_lhs, 0.0);
  EXPECT_EQ(r.contraction_lhs, 0.0);
  EXPECT_EQ(r.spectral_gap, 0.0);
  EXPECT_EQ(r.clarkson_residual, 0.0);
}

TEST(Structural, AbsoluteValueContractsDiagonalRamp) {
  Hierarchy h(RatioSequence({3, 5}), 2);
  const AffineFunction u = diag_ramp(h).affine_map(2, -1);  // changes sign at q0
  const auto r = structural_checks(h, u, corner_indicator(h), Exponent(3), 2);
  EXPECT_TRUE(r.contraction_ok);
  EXPECT_LE(r.contraction_lhs, r.contraction_rhs);
  // |2t - 1| has the same slope magnitude everywhere: equality
  EXPECT_NEAR(r.contraction_lhs, r.contraction_rhs, 1e-12);
}

TEST(Structural, LocalityOnOppositeArms) {
  Hierarchy h(RatioSequence({3, 5, 3}), 3);
  SplitMix64 rng(9);
  const Letter arm1{1, 1}, arm3{3, 1};
  for (int trial = 0; trial < 10; ++trial) {
    const AffineFunction u = random_supported(h, 2, {arm1}, rng), v = random_supported(h, 2, {arm3}, rng);
    const auto r = structural_checks(h, u, v, pick(trial), 3);
    EXPECT_TRUE(r.supports_separated);
    EXPECT_TRUE(r.locality_ok);
    // oracle: edge sets are disjoint, so the two energies just add
    if (pick(trial).is_integer()) {
      const auto Es = discrete_energy(h, combine(u, v, h), pick(trial), 3);
      EXPECT_EQ(*Es.exact, *discrete_energy(h, u, pick(trial), 3).exact + *discrete_energy(h, v, pick(trial), 3).exact);
    }
  }
}

TEST(Structural, RandomSuite) {
  Hierarchy h(RatioSequence({3, 5, 3}), 3);
  SplitMix64 rng(33);
  for (int trial = 0; trial < 60; ++trial) {
    const Exponent p = pick(trial);
    const AffineFunction u = random_affine(h, trial % 3, rng), v = random_affine(h, (trial + 1) % 3, rng);
    const auto r = structural_checks(h, u, v, p, 3);
    EXPECT_TRUE(r.product_ok) << trial;
    EXPECT_TRUE(r.contraction_ok) << trial;
    EXPECT_TRUE(r.clarkson_ok) << trial << " residual " << r.clarkson_residual;
    EXPECT_GT(r.spectral_gap, 0.0);
    EXPECT_GT(r.morrey, 0.0);
  }
}

TEST(Structural, ClarksonIsEqualityAtTwo) {
  Hierarchy h(RatioSequence({5}), 1);
  SplitMix64 rng(1);
  const auto r = structural_checks(h, random_affine(h, 1, rng), random_affine(h, 0, rng), Exponent(2), 1);
  EXPECT_EQ(r.clarkson_residual, 0.0);
}

TEST(Structural, MorreyStableBetweenLevels) {
  Hierarchy h(RatioSequence(RatioGenerator::constant(3), 6), 6);
  SplitMix64 rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    const AffineFunction u = random_affine(h, trial % 3, rng);
    const double m4 = structural_checks(h, u, u, Exponent(2), 4).morrey;
    const double m6 = structural_checks(h, u, u, Exponent(2), 6).morrey;
    EXPECT_GE(m6, m4 * (1 - 1e-12));
    EXPECT_LE(m6, 2 * m4);
  }
}
