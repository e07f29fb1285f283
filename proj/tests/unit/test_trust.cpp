#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "../common/random_models.hpp"
#include "cts/random.hpp"
#include "cts/trust.hpp"

namespace cts::trust {
namespace {

using reward::RewardModel;
using reward::Tree;

Tree leaf(double v) {
  Tree t;
  t.feature = {-1};
  t.threshold = {0.0};
  t.left = {-1};
  t.right = {-1};
  t.value = {v};
  return t;
}

// Depth-2 tree: column 0 picks the record type, column 1 is the protected
// code. Leaf logits: type 0 -> {0, ln 1.5}, type 1 -> {0, ln 4}.
RewardModel shift_model() {
  Tree t;
  t.feature = {0, 1, 1, -1, -1, -1, -1};
  t.threshold = {0.5, 0.5, 0.5, 0, 0, 0, 0};
  t.left = {1, 3, 5, -1, -1, -1, -1};
  t.right = {2, 4, 6, -1, -1, -1, -1};
  t.value = {0, 0, 0, 0.0, std::log(1.5), 0.0, std::log(4.0)};
  RewardModel m;
  m.trees = {t};
  m.learning_rate = 1.0;
  m.n_features = 2;
  return m;
}

TEST(TrustScore, PerfectBatchIsOne) {
  EXPECT_EQ(trust_score(0, 0, 0, 0, 0, TrustWeights{}), 1.0);
}

TEST(TrustScore, WorstBatchIsZeroForAnyWeights) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    double w[5];
    double sum = 0.0;
    for (double& v : w) sum += (v = rng.uniform());
    const TrustWeights weights{w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum,
                               1.0 - (w[0] + w[1] + w[2] + w[3]) / sum};
    EXPECT_NEAR(trust_score(1, 1, 1, 1, 1, weights), 0.0, 1e-12);
  }
}

TEST(TrustScore, HandValue) {
  EXPECT_NEAR(trust_score(0.3, 0.1, 0.0, 0.1, 0.05, TrustWeights{}), 0.89, 1e-12);
}

TEST(TrustScore, ReducesToFourTermScoreWithoutConsistency) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(), b = rng.uniform(), g = rng.uniform(), d = rng.uniform();
    const double s = a + b + g + d;
    const TrustWeights w{a / s, b / s, g / s, d / s, 0.0};
    const double D = rng.uniform(), u = rng.uniform(), R = rng.uniform(), E = rng.uniform();
    const double four_term = 1.0 - (w.alpha * D + w.beta * u + w.gamma * R + w.delta * E);
    EXPECT_NEAR(trust_score(D, u, R, E, rng.uniform(), w), four_term, 1e-15);
  }
}

TEST(TrustScore, MonotoneNonincreasingInEachComponent) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    double c[5];
    for (double& v : c) v = rng.uniform();
    const std::size_t which = rng.uniform_index(5);
    double raised[5];
    std::copy(c, c + 5, raised);
    raised[which] = c[which] + (1.0 - c[which]) * rng.uniform();
    const TrustWeights w{};
    EXPECT_LE(trust_score(raised[0], raised[1], raised[2], raised[3], raised[4], w),
              trust_score(c[0], c[1], c[2], c[3], c[4], w));
  }
}

TEST(TrustScore, RejectsInvalidInputs) {
  EXPECT_THROW(trust_score(1.5, 0, 0, 0, 0, TrustWeights{}), std::invalid_argument);
  EXPECT_THROW(trust_score(0, -0.1, 0, 0, 0, TrustWeights{}), std::invalid_argument);
  EXPECT_THROW(trust_score(0, 0, 0, 0, 0, TrustWeights{0.5, 0.5, 0.5, 0, 0}), std::invalid_argument);
  EXPECT_THROW((TrustWeights{1.2, -0.2, 0, 0, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((TrustWeights{1, 0, 0, 0, 0}.validate()));
}

TEST(Ema, Examples) {
  const std::vector<double> t{0.8, 0.6};
  EXPECT_EQ(ema_smooth(t, 1.0), t);
  const auto s = ema_smooth(t, 0.5);
  EXPECT_EQ(s[0], 0.8);
  EXPECT_NEAR(s[1], 0.7, 1e-15);
  const std::vector<double> flat(7, 0.42);
  for (double lambda : {0.1, 0.5, 0.9}) {
    for (double v : ema_smooth(flat, lambda)) EXPECT_NEAR(v, 0.42, 1e-15);
  }
  EXPECT_THROW(ema_smooth(t, 0.0), std::invalid_argument);
  EXPECT_THROW(ema_smooth(t, 1.1), std::invalid_argument);
  EXPECT_THROW(ema_smooth(std::vector<double>{}, 0.5), std::invalid_argument);
}

TEST(Ema, StaysWithinInputRange) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> t(1 + rng.uniform_index(30));
    for (double& v : t) v = rng.uniform();
    const double lambda = 1.0 - rng.uniform();  // (0, 1]
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    for (double v : ema_smooth(t, lambda)) {
      EXPECT_GE(v, *lo);
      EXPECT_LE(v, *hi);
    }
  }
}

TEST(Counterfactual, BlindModelScoresZero) {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto model = testing::random_model(rng, 4, 3, 0.0);
    const auto batch = testing::random_batch(rng, 40, 4);
    EXPECT_EQ(fairness_violation_rate(model, batch.original, batch.flipped), 0.0);
    EXPECT_EQ(counterfactual_consistency(model, batch.original, batch.flipped), 0.0);
  }
}

TEST(Counterfactual, StumpOnProtectedCodeAlwaysViolates) {
  Tree t;
  t.feature = {0, -1, -1};
  t.threshold = {0.5, 0, 0};
  t.left = {1, -1, -1};
  t.right = {2, -1, -1};
  t.value = {0, -2.0, 2.0};
  RewardModel m;
  m.trees = {t};
  m.learning_rate = 1.0;
  m.n_features = 1;
  Matrix original(4, 1), flipped(4, 1);
  original << 0, 1, 1, 0;
  flipped << 1, 0, 0, 1;
  EXPECT_EQ(fairness_violation_rate(m, original, flipped), 1.0);
  EXPECT_GT(counterfactual_consistency(m, original, flipped), 0.0);
}

TEST(Counterfactual, FlipInvariantSingleRecord) {
  RewardModel m;
  m.trees = {leaf(1.0)};
  m.n_features = 1;
  Matrix original(1, 1), flipped(1, 1);
  original << 0;
  flipped << 1;
  EXPECT_EQ(fairness_violation_rate(m, original, flipped), 0.0);
}

TEST(Counterfactual, ConsistencyIsMeanProbabilityShift) {
  // Shifts 0.6 - 0.5 = 0.1 and 0.8 - 0.5 = 0.3.
  const auto m = shift_model();
  Matrix original(2, 2), flipped(2, 2);
  original << 0, 0, 1, 0;
  flipped << 0, 1, 1, 1;
  EXPECT_NEAR(counterfactual_consistency(m, original, flipped), 0.2, 1e-12);
  EXPECT_EQ(fairness_violation_rate(m, original, flipped), 1.0);
}

TEST(Counterfactual, ViolationImpliesInconsistency) {
  Rng rng(6);
  int violated = 0;
  for (int i = 0; i < 500; ++i) {
    const auto model = testing::random_model(rng, 4, 3, 0.4);
    const auto batch = testing::random_batch(rng, 1 + rng.uniform_index(30), 4);
    const double r = fairness_violation_rate(model, batch.original, batch.flipped);
    const double c = counterfactual_consistency(model, batch.original, batch.flipped);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0);
    if (r > 0.0) {
      ++violated;
      EXPECT_GT(c, 0.0);
    }
  }
  EXPECT_GT(violated, 50);
}

TEST(FeatureImportance, InformativeFeatureRanksFirst) {
  // Separable on column 0; column 1 is noise the model never uses.
  Rng rng(7);
  Matrix x(400, 2);
  std::vector<int> y;
  for (Eigen::Index i = 0; i < 400; ++i) {
    x(i, 0) = rng.uniform() - 0.5;
    x(i, 1) = rng.normal();
    y.push_back(x(i, 0) > 0.0 ? 1 : 0);
  }
  Tree t;
  t.feature = {0, -1, -1};
  t.threshold = {0.0, 0, 0};
  t.left = {1, -1, -1};
  t.right = {2, -1, -1};
  t.value = {0, -3.0, 3.0};
  RewardModel m;
  m.trees = {t};
  m.learning_rate = 1.0;
  m.n_features = 2;
  const std::vector<FeatureGroup> groups{{"noise", {1}}, {"signal", {0}}};
  const auto ranked = feature_importance(m, x, y, groups, 11, 5);
  ASSERT_EQ(ranked.size(), 2u);
  EXPECT_EQ(ranked[0].group, "signal");
  EXPECT_NEAR(ranked[0].importance, 0.5, 0.08);
  EXPECT_EQ(ranked[1].group, "noise");
  EXPECT_EQ(ranked[1].importance, 0.0);
  EXPECT_EQ(feature_importance(m, x, y, groups, 11, 5)[0].importance, ranked[0].importance);
}

TEST(Timeline, ScoresSmoothsAndAlerts) {
  const std::vector<TrustComponents> batches{
      {0.0, 0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0, 1.0}, {0.5, 0.5, 0.5, 0.5, 0.5}};
  const auto tl = build_timeline(batches, TrustWeights{}, 0.5);
  ASSERT_EQ(tl.rows.size(), 3u);
  EXPECT_EQ(tl.rows[0].trust, 1.0);
  EXPECT_EQ(tl.rows[1].smoothed, 0.5);
  EXPECT_EQ(tl.rows[2].smoothed, 0.5);
  EXPECT_EQ(tl.alerts(0.7), (std::vector<std::size_t>{1, 2}));
  const auto j = tl.to_json();
  EXPECT_EQ(j["batches"].size(), 3u);
  EXPECT_EQ(j["batches"][0]["batch"], 1);
  EXPECT_EQ(j["lambda"], 0.5);
}

}  // namespace
}  // namespace cts::trust
