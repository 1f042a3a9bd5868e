#include <gtest/gtest.h>

#include <numeric>
#include <vector>

#include "netgame/errors.hpp"
#include "netgame/model.hpp"
#include "test_economies.hpp"

namespace netgame {
namespace {

StrategyProfile random_profile(std::uint64_t seed, int n) {
  CounterRng rng(seed);
  StrategyProfile sp = StrategyProfile::zero(n);
  for (int i = 0; i < n; ++i) sp.a(i) = rng.uniform(0.0, 2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) sp.g(i, j) = rng.uniform(0.0, 1.0);
    }
  }
  return sp;
}

TEST(GameParameters, RejectsInvalidInputs) {
  const Vector b = Vector::Constant(2, 0.1), c = Vector::Ones(2);
  const Matrix s = Matrix::Zero(2, 2), f = Matrix::Ones(2, 2);
  EXPECT_THROW(GameParameters(b, Vector::Zero(2), s, f, 0.1), InvalidParameters);
  EXPECT_THROW(GameParameters(b, c, s, Matrix::Zero(2, 2), 0.1), InvalidParameters);
  EXPECT_THROW(GameParameters(b, c, s, f, -0.1), InvalidParameters);
  EXPECT_THROW(GameParameters(Vector::Ones(1), Vector::Ones(1), Matrix::Zero(1, 1), Matrix::Ones(1, 1), 0.1),
               InvalidParameters);
  Matrix asym = s;
  asym(0, 1) = 0.2;
  asym(1, 0) = 0.3;
  EXPECT_THROW(GameParameters(b, c, asym, f, 0.1), InvalidParameters);
  EXPECT_NO_THROW(GameParameters(b, c, s, f, 0.0));
}

TEST(AgentUtility, InvariantUnderRelabelingOthers) {
  const int n = 5;
  const GameParameters p = testing::random_economy(11, n);
  const Intervention iv = testing::random_intervention(12, n, 0.2);
  const StrategyProfile sp = random_profile(13, n);
  const std::vector<int> perm = {0, 3, 1, 4, 2};  // agent 0 stays put

  auto permute_vec = [&](const Vector& v) {
    Vector out(n);
    for (int k = 0; k < n; ++k) out(perm[k]) = v(k);
    return out;
  };
  auto permute_mat = [&](const Matrix& m) {
    Matrix out(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out(perm[i], perm[j]) = m(i, j);
    }
    return out;
  };
  const GameParameters q(permute_vec(p.b()), permute_vec(p.c()), permute_mat(p.s()), permute_mat(p.f()),
                         p.rho());
  const Intervention jv(permute_vec(iv.beta()), permute_mat(iv.sigma()));
  const StrategyProfile tp{permute_vec(sp.a), permute_mat(sp.g)};
  EXPECT_NEAR(agent_utility(p, iv, sp, 0), agent_utility(q, jv, tp, 0), 1e-13);
}

TEST(AgentUtility, MatchesExplicitSum) {
  const GameParameters p = testing::random_economy(3, 3);
  const Intervention iv = testing::random_intervention(4, 3, 0.1);
  const StrategyProfile sp = random_profile(5, 3);
  const Matrix G = sp.G();
  const int i = 1;
  double u = (p.b()(i) + iv.beta()(i)) * sp.a(i) - 0.5 * p.c()(i) * sp.a(i) * sp.a(i);
  for (int j = 0; j < 3; ++j) {
    if (j == i) continue;
    u += p.rho() * G(i, j) * sp.a(i) * sp.a(j);
    u += (p.s()(i, j) + iv.sigma()(i, j)) * G(i, j);
    u -= 0.5 * p.f()(i, j) * sp.g(i, j) * sp.g(i, j);
  }
  EXPECT_NEAR(agent_utility(p, iv, sp, i), u, 1e-13);
}

TEST(PlannerPayment, LinearInSubsidiesAndInProfile) {
  const int n = 4;
  const Intervention a = testing::random_intervention(21, n, 0.3);
  const Intervention b = testing::random_intervention(22, n, 0.3);
  const StrategyProfile sp = random_profile(23, n), tp = random_profile(24, n);
  const double t = 0.37;
  const Intervention mix(t * a.beta() + 2.0 * b.beta(), t * a.sigma() + 2.0 * b.sigma());
  EXPECT_NEAR(planner_payment(mix, sp), t * planner_payment(a, sp) + 2.0 * planner_payment(b, sp), 1e-13);
  const StrategyProfile comb{t * sp.a + 2.0 * tp.a, t * sp.g + 2.0 * tp.g};
  EXPECT_NEAR(planner_payment(a, comb), t * planner_payment(a, sp) + 2.0 * planner_payment(a, tp), 1e-13);
}

TEST(PlannerPayment, PaysEachLinkFromBothEnds) {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 1) = sigma(1, 0) = 0.5;
  const Intervention iv(Vector::Zero(2), sigma);
  StrategyProfile sp = StrategyProfile::zero(2);
  sp.g(0, 1) = 1.0;  // G_01 = G_10 = 1
  EXPECT_DOUBLE_EQ(planner_payment(iv, sp), 1.0);
}

TEST(Welfare, ActionSumStrictlyIncreasing) {
  const WelfareSpec w = WelfareSpec::weighted_action_sum((Vector(3) << 1.0, 0.5, 2.0).finished());
  StrategyProfile sp = random_profile(31, 3);
  const double base = welfare(w, sp);
  for (int i = 0; i < 3; ++i) {
    StrategyProfile up = sp;
    up.a(i) += 1e-6;
    EXPECT_GT(welfare(w, up), base);
  }
  EXPECT_THROW(WelfareSpec::weighted_action_sum((Vector(2) << 1.0, 0.0).finished()), InvalidParameters);
}

TEST(Welfare, LinkWeightSumCountsBothDirections) {
  StrategyProfile sp = StrategyProfile::zero(3);
  sp.g(0, 1) = 0.25;
  sp.g(2, 1) = 0.5;
  EXPECT_DOUBLE_EQ(welfare(WelfareSpec::link_weight_sum(), sp), 2.0 * 0.75);
}

TEST(PairIndex, LexicographicOrderAndRoundTrip) {
  const PairIndex idx(4);
  ASSERT_EQ(idx.size(), 6);
  EXPECT_EQ(idx[0], std::make_pair(0, 1));
  EXPECT_EQ(idx[2], std::make_pair(0, 3));
  EXPECT_EQ(idx[3], std::make_pair(1, 2));
  for (int k = 0; k < idx.size(); ++k) {
    EXPECT_EQ(idx.id(idx[k].first, idx[k].second), k);
    EXPECT_EQ(idx.id(idx[k].second, idx[k].first), k);
  }
  EXPECT_THROW(idx.id(1, 1), IndexOutOfRange);

  const Intervention iv = testing::random_intervention(41, 4, 1.0);
  const Vector x = to_decision_vector(iv);
  ASSERT_EQ(x.size(), 4 + 6);
  const Intervention back = from_decision_vector(x, 4);
  EXPECT_EQ(back.beta(), iv.beta());
  EXPECT_EQ(back.sigma(), iv.sigma());
}

}  // namespace
}  // namespace netgame
