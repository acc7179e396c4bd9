#include <random>

#include <gtest/gtest.h>

#include "adpol/semigroup.hpp"

using namespace adpol;

TEST(Semigroup, ComposeSubstitutes) {
  EXPECT_EQ(compose({1, 2}, {3, 4}), (GroupElement{7, 8}));
  EXPECT_EQ(compose(GroupElement::identity(), {2.5, -3}), (GroupElement{2.5, -3}));
  EXPECT_EQ(compose({2.5, -3}, GroupElement::identity()), (GroupElement{2.5, -3}));
}

TEST(Semigroup, CharacterIsMultiplicative) {
  EXPECT_EQ(character(compose({1, 2}, {3, 4})), 8.0);
  EXPECT_EQ(character({5, 3}), 3.0);
  EXPECT_EQ(character(GroupElement::translation(-7)), 1.0);
  EXPECT_EQ(character({0, -2}), -2.0);
}

TEST(Semigroup, ComposeMatchesFunctionComposition) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int k = 0; k < 50; ++k) {
    const GroupElement g{d(rng), d(rng)}, h{d(rng), d(rng)}, f{d(rng), d(rng)};
    const double t = d(rng);
    EXPECT_NEAR(compose(g, h)(t), g(h(t)), 1e-12);
    const auto lhs = compose(compose(g, h), f), rhs = compose(g, compose(h, f));
    EXPECT_NEAR(lhs.a, rhs.a, 1e-12);
    EXPECT_NEAR(lhs.b, rhs.b, 1e-12);
  }
}

TEST(Semigroup, SubsemigroupAndInverse) {
  EXPECT_TRUE(in_subsemigroup({4, -0.5}, 0.5));
  EXPECT_FALSE(in_subsemigroup({0, 2}, 1));
  EXPECT_TRUE(in_subsemigroup({0, 1e6}, INFINITY));
  const GroupElement g{2, -4};
  const auto e = compose(g, invert(g));
  EXPECT_NEAR(e.a, 0, 1e-15);
  EXPECT_NEAR(e.b, 1, 1e-15);
  EXPECT_THROW(invert({1, 0}), InvalidArgument);
}

TEST(Semigroup, ActionOnComplexPlane) {
  EXPECT_EQ(act_on_complex({2, 3}, cplx(0, 1)).value(), cplx(2, 3));
  EXPECT_EQ(act_on_complex(GroupElement::identity(), cplx(0.3, -2)).value(), cplx(0.3, -2));
  const cplx s(-1.5, 0.25);
  EXPECT_EQ(act_on_complex({s.real(), s.imag()}, cplx(0, 1)).value(), s);
  EXPECT_TRUE(act_on_complex({1, 2}, PolarizationParam::infinity()).is_infinite());
  EXPECT_THROW(act_on_complex({1, 0}, PolarizationParam::infinity()), InvalidArgument);
}

TEST(Semigroup, ActionIsCompatibleWithComposition) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int k = 0; k < 30; ++k) {
    const GroupElement g{d(rng), d(rng)}, h{d(rng), d(rng)};
    const cplx s(d(rng), d(rng));
    const cplx lhs = act_on_complex(compose(g, h), s).value();
    const cplx rhs = act_on_complex(g, act_on_complex(h, s)).value();
    EXPECT_NEAR(std::abs(lhs - rhs), 0, 1e-12);
  }
}

TEST(Semigroup, Transporter) {
  auto t = solve_transporter(cplx(0, 1), cplx(2, 3));
  EXPECT_EQ(t.g, (GroupElement{2, 3}));
  EXPECT_TRUE(t.unique);
  EXPECT_EQ(solve_transporter(cplx(0, 1), cplx(0, 1)).g, GroupElement::identity());
  t = solve_transporter(cplx(0, 1), cplx(0, -1));
  EXPECT_EQ(t.g, (GroupElement{0, -1}));
  EXPECT_EQ(character(t.g), 1.0 / -1.0);

  const auto real = solve_transporter(0.5, 2.0);
  EXPECT_FALSE(real.unique);
  EXPECT_DOUBLE_EQ(act_on_complex(real.g, 0.5).value().real(), 2.0);
  EXPECT_THROW(solve_transporter(0.5, cplx(0, 1)), NoSolution);
  EXPECT_THROW(solve_transporter(PolarizationParam::infinity(), 1.0), InvalidArgument);
}

TEST(Semigroup, TransporterRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int k = 0; k < 30; ++k) {
    const cplx from(d(rng), d(rng) + 3.5), to(d(rng), d(rng));
    const auto g = solve_transporter(from, to).g;
    EXPECT_NEAR(std::abs(act_on_complex(g, from).value() - to), 0, 1e-12);
  }
}

TEST(Semigroup, LeafDirections) {
  const auto zero = leaf_direction(0.0);
  EXPECT_EQ(zero.da, 0.0);
  EXPECT_EQ(zero.db, -1.0);
  EXPECT_TRUE(std::isinf(zero.slope()));
  EXPECT_EQ(leaf_direction(1.0).slope(), -1.0);
  EXPECT_EQ(leaf_direction(PolarizationParam::infinity()).slope(), 0.0);
  EXPECT_THROW(leaf_direction(cplx(0, 1)), InvalidArgument);
}

TEST(Semigroup, LeafIsStabilizer) {
  // moving along the leaf through id keeps g.s = s
  for (double s : {-2.0, 0.0, 0.7, 3.0}) {
    const auto dir = leaf_direction(s);
    for (double t : {-0.5, 0.25, 1.0}) {
      const GroupElement g{t * dir.da, 1.0 + t * dir.db};
      EXPECT_NEAR(act_on_complex(g, s).value().real(), s, 1e-14);
    }
  }
}
