#include <cmath>

#include <gtest/gtest.h>

#include "cts/error.hpp"
#include "cts/random.hpp"
#include "cts/reward_model.hpp"
#include "test_support.hpp"

namespace cts::reward {
namespace {

// One stump on column 0: x <= 0 gives logit `low`, otherwise `high`.
RewardModel stump_model(double low, double high) {
  Tree t;
  t.feature = {0, -1, -1};
  t.threshold = {0.0, 0.0, 0.0};
  t.left = {1, -1, -1};
  t.right = {2, -1, -1};
  t.value = {0.0, low, high};
  RewardModel m;
  m.trees = {t};
  m.learning_rate = 1.0;
  m.n_features = 1;
  return m;
}

// Logits drawn N(0, 2^2) and labels drawn from logistic(logit / scale).
void logistic_sample(std::size_t n, double scale, std::uint64_t seed, std::vector<double>& logits,
                     std::vector<int>& labels) {
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 2.0 * rng.normal();
    logits.push_back(z);
    labels.push_back(rng.bernoulli(1.0 / (1.0 + std::exp(-z / scale))) ? 1 : 0);
  }
}

TEST(PredictProba, SumsToOne) {
  const auto m = stump_model(-0.7, 1.3);
  for (double x : {-2.0, 0.0, 0.5, 9.0}) {
    const double row[] = {x};
    const auto p = m.predict_proba(row);
    ASSERT_EQ(p.probs.size(), 2u);
    EXPECT_NEAR(p.probs[0] + p.probs[1], 1.0, 1e-15);
  }
}

TEST(PredictProba, HugeTemperatureApproachesHalf) {
  auto m = stump_model(-5.0, 8.0);
  m.temperature = 1e6;
  const double row[] = {1.0};
  const auto p = m.predict_proba(row);
  EXPECT_NEAR(p.probs[0], 0.5, 1e-3);
  EXPECT_NEAR(p.probs[1], 0.5, 1e-3);
}

TEST(PredictProba, ZeroTreesGiveHalf) {
  RewardModel m;
  m.n_features = 3;
  const double row[] = {1.0, 2.0, 3.0};
  const auto p = m.predict_proba(row);
  EXPECT_EQ(p.probs[0], 0.5);
  EXPECT_EQ(p.probs[1], 0.5);
}

TEST(PredictProba, DimensionMismatchThrows) {
  const auto m = stump_model(0.0, 1.0);
  const double row[] = {1.0, 2.0};
  EXPECT_THROW(m.predict_proba(row), std::invalid_argument);
}

TEST(Temperature, MatchesNumericalOracle) {
  const auto oracle = testing::load_fixture("temperature_oracle.json");
  const auto logits = oracle["logits"].get<std::vector<double>>();
  const auto labels = oracle["labels"].get<std::vector<int>>();
  const double t = fit_temperature(logits, labels);
  EXPECT_NEAR(t, oracle["temperature"].get<double>(), 1e-3);
  EXPECT_NEAR(temperature_nll(logits, labels, t), oracle["nll"].get<double>(), 1e-9);
}

TEST(Temperature, CalibratedLogitsRecoverUnitTemperature) {
  std::vector<double> logits;
  std::vector<int> labels;
  logistic_sample(4000, 1.0, 21, logits, labels);
  const double t = fit_temperature(logits, labels);
  EXPECT_GE(t, 0.9);
  EXPECT_LE(t, 1.1);
}

TEST(Temperature, OverconfidentLogitsGetTemperatureAboveOne) {
  std::vector<double> logits;
  std::vector<int> labels;
  logistic_sample(4000, 1.0, 22, logits, labels);
  for (double& z : logits) z *= 5.0;
  EXPECT_GT(fit_temperature(logits, labels), 1.0);
}

TEST(Temperature, SingleClassIsError) {
  const std::vector<double> logits{0.1, 0.2};
  const std::vector<int> labels{1, 1};
  EXPECT_THROW(fit_temperature(logits, labels), DataError);
}

TEST(Temperature, ScalingNeverChangesArgmax) {
  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    auto m = stump_model(4.0 * rng.normal(), 4.0 * rng.normal());
    const double row[] = {rng.normal()};
    const auto before = m.predict_proba(row).argmax();
    m.temperature = std::exp(6.0 * rng.uniform() - 3.0);
    EXPECT_EQ(m.predict_proba(row).argmax(), before);
  }
}

TEST(Uncertainty, MarginExamples) {
  EXPECT_EQ(uncertainty_margin({{1.0, 0.0}}), 0.0);
  EXPECT_EQ(uncertainty_margin({{0.5, 0.5}}), 1.0);
  EXPECT_NEAR(uncertainty_margin({{0.7, 0.3}}), 0.6, 1e-15);
}

TEST(Uncertainty, EqualsOneMinusMargin) {
  Rng rng(24);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform();
    const ProbOutput probs{{1.0 - p, p}};
    const double margin = std::max(p, 1.0 - p) - std::min(p, 1.0 - p);
    EXPECT_EQ(uncertainty_margin(probs), 1.0 - margin);
  }
}

TEST(Uncertainty, BatchMean) {
  // Probabilities 0.9 and 0.7 for the positive class: u = 0.2 and 0.6.
  const auto m = stump_model(std::log(0.7 / 0.3), std::log(9.0));
  Matrix batch(2, 1);
  batch << 1.0, -1.0;
  EXPECT_NEAR(batch_uncertainty(m, batch), 0.4, 1e-12);

  const auto confident = stump_model(-800.0, 800.0);
  EXPECT_EQ(batch_uncertainty(confident, batch), 0.0);

  RewardModel uniform;
  uniform.n_features = 1;
  EXPECT_EQ(batch_uncertainty(uniform, batch), 1.0);
  EXPECT_THROW(batch_uncertainty(m, Matrix(0, 1)), std::invalid_argument);
}

TEST(Serialization, RoundTripAndSchemaCheck) {
  auto m = stump_model(-0.5, 0.25);
  m.temperature = 1.7;
  m.schema_hash = "abc123";
  m.feature_schema = {{"dim", 1}};
  const auto dir = testing::scratch_dir("model");
  m.save(dir / "model.json");
  const auto loaded = RewardModel::load(dir / "model.json", "abc123");
  EXPECT_EQ(loaded.trees, m.trees);
  EXPECT_EQ(loaded.temperature, 1.7);
  EXPECT_EQ(loaded.learning_rate, 1.0);
  EXPECT_EQ(loaded.n_features, 1u);
  EXPECT_THROW(RewardModel::load(dir / "model.json", "other"), DataError);
  auto j = m.to_json();
  j["version"] = 99;
  EXPECT_THROW(RewardModel::from_json(j, "abc123"), DataError);
}

TEST(Accuracy, CountsMatches) {
  const auto m = stump_model(-1.0, 1.0);
  Matrix x(4, 1);
  x << -1, 1, 2, -3;
  const std::vector<int> y{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(accuracy(m, x, y), 0.75);
}

}  // namespace
}  // namespace cts::reward
