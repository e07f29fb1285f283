#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/featurize.hpp"
#include "cts/matrix.hpp"
#include "cts/reward_model.hpp"

namespace cts::trust {

/// Weights of drift, uncertainty, violation rate, error and counterfactual
/// consistency. They must sum to 1 so the trust score stays in [0, 1].
struct TrustWeights {
  double alpha = 0.2;  // drift D
  double beta = 0.2;   // uncertainty u_bar
  double gamma = 0.2;  // fairness violation rate R
  double delta = 0.2;  // classification error E
  double zeta = 0.2;   // counterfactual consistency C

  /// Throws std::invalid_argument when a weight leaves [0, 1] or the sum
  /// differs from 1 by more than 1e-9.
  void validate() const;
};

struct TrustComponents {
  double drift = 0.0;
  double uncertainty = 0.0;
  double violation = 0.0;
  double error = 0.0;
  double consistency = 0.0;
};

/// 1 - (alpha D + beta u + gamma R + delta E + zeta C), clamped to [0, 1].
/// Throws std::invalid_argument for a component outside [0, 1] or invalid
/// weights.
double trust_score(const TrustComponents& components, const TrustWeights& weights);
double trust_score(double drift, double uncertainty, double violation, double error,
                   double consistency, const TrustWeights& weights);

/// out[0] = in[0]; out[i] = lambda in[i] + (1 - lambda) out[i-1].
/// Throws std::invalid_argument for an empty input or lambda outside (0, 1].
std::vector<double> ema_smooth(std::span<const double> values, double lambda);

/// Fraction of rows whose predicted class changes between `original` and the
/// protected-attribute counterfactual `flipped`.
double fairness_violation_rate(const reward::RewardModel& model, const Matrix& original,
                               const Matrix& flipped);

/// Mean |f(x) - f(x_cf)| of the calibrated positive-class probability.
double counterfactual_consistency(const reward::RewardModel& model, const Matrix& original,
                                  const Matrix& flipped);

struct FeatureImportance {
  std::string group;
  double importance = 0.0;  // accuracy drop when the group is shuffled
};

/// Permutation importance: each group's columns are shuffled jointly across
/// rows `repeats` times and the mean accuracy drop is reported, sorted by
/// descending importance (ties by name).
std::vector<FeatureImportance> feature_importance(const reward::RewardModel& model,
                                                  const Matrix& features,
                                                  std::span<const int> labels,
                                                  std::span<const FeatureGroup> groups,
                                                  std::uint64_t seed, std::size_t repeats = 5);

/// Per-batch trust components and scores.
struct TrustRow {
  TrustComponents components;
  double trust = 0.0;
  double smoothed = 0.0;
};

struct TrustTimeline {
  std::vector<TrustRow> rows;
  double lambda = 0.5;

  /// 0-based indices of batches whose smoothed trust is below the threshold.
  std::vector<std::size_t> alerts(double threshold) const;
  nlohmann::json to_json() const;
};

/// Scores each batch then smooths the sequence.
TrustTimeline build_timeline(std::span<const TrustComponents> batches, const TrustWeights& weights,
                             double lambda);

}  // namespace cts::trust
