#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/gbdt.hpp"
#include "cts/matrix.hpp"

namespace cts::reward {

/// Class probabilities; index 0 = fake, 1 = true.
struct ProbOutput {
  std::vector<double> probs;

  /// First index holding the maximum probability.
  std::size_t argmax() const;
};

/// Boosted-tree reward classifier with post-hoc temperature.
struct RewardModel {
  std::vector<Tree> trees;
  double learning_rate = 0.1;
  double temperature = 1.0;
  std::size_t n_features = 0;
  std::string schema_hash;
  nlohmann::json feature_schema;
  BoostingTrace trace;

  /// Sum of learning_rate * tree(x), before temperature.
  double raw_logit(std::span<const double> x) const;

  /// logistic(raw_logit / temperature) for the positive class. Throws
  /// std::invalid_argument on a dimension mismatch.
  ProbOutput predict_proba(std::span<const double> x) const;
  double positive_probability(std::span<const double> x) const;
  int predict(std::span<const double> x) const;

  nlohmann::json to_json() const;
  /// Throws DataError for a wrong format/version or a schema hash differing
  /// from `expected_schema_hash`.
  static RewardModel from_json(const nlohmann::json& j, const std::string& expected_schema_hash);

  void save(const std::filesystem::path& path) const;
  static RewardModel load(const std::filesystem::path& path, const std::string& expected_schema_hash);
};

inline constexpr int kModelFormatVersion = 1;

/// Fits on the leading train_fraction of the rows (their order is taken as
/// temporal) and early-stops on the rest. Throws std::invalid_argument on a
/// length mismatch and DataError for fewer than 20 rows or a single-class
/// training split.
RewardModel train(const Matrix& features, std::span<const int> labels,
                  const BoostingConfig& config);

/// Rows [0, train_rows) fit, [train_rows, n) validate, for n rows.
std::size_t train_rows_for(std::size_t n, double train_fraction);

/// Minimizes validation negative log-likelihood of logits / T over
/// [lower, upper] by golden-section search to `tolerance` bracket width.
/// Throws DataError when the labels hold a single class.
double fit_temperature(std::span<const double> logits, std::span<const int> labels,
                       double lower = 0.05, double upper = 20.0, double tolerance = 1e-4);

/// Mean negative log-likelihood of labels under logistic(logit / T).
double temperature_nll(std::span<const double> logits, std::span<const int> labels, double t);

RewardModel calibrate_temperature(RewardModel model, const Matrix& val_features,
                                  std::span<const int> val_labels);

/// 1 - (p_max - p_second_max).
double uncertainty_margin(const ProbOutput& probs);

/// Mean uncertainty_margin over the rows. Throws std::invalid_argument when empty.
double batch_uncertainty(const RewardModel& model, const Matrix& batch);

/// Fraction of rows whose prediction matches the label.
double accuracy(const RewardModel& model, const Matrix& features, std::span<const int> labels);

}  // namespace cts::reward
