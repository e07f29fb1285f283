#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/matrix.hpp"

namespace cts::reward {

/// Depth-limited binary regression tree in flat arrays. Node 0 is the root;
/// a node with feature == -1 is a leaf holding `value`. Rows go left when
/// x[feature] <= threshold.
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  double predict(std::span<const double> x) const;
  bool splits_on(std::size_t column) const;
  std::size_t node_count() const noexcept { return feature.size(); }

  nlohmann::json to_json() const;
  static Tree from_json(const nlohmann::json& j);
  bool operator==(const Tree&) const = default;
};

struct BoostingConfig {
  std::size_t n_trees = 200;
  std::size_t depth = 4;
  double learning_rate = 0.1;
  std::size_t early_stop_patience = 20;
  /// Leading fraction (in row order) used for fitting; the tail validates.
  double train_fraction = 0.8;
  double l2 = 1.0;
  double min_child_hessian = 1.0;
  std::size_t max_bins = 256;
  /// Extra rolling-origin validations reported as diagnostics.
  std::size_t validation_repeats = 1;
};

/// Per-round losses recorded during fitting.
struct BoostingTrace {
  std::vector<double> train_loss;       // index r: mean log loss after r trees
  std::vector<double> validation_loss;  // same indexing
  std::size_t best_round = 0;           // number of trees kept
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::vector<double> repeat_validation_accuracy;
};

/// Mean logistic loss of raw logits against 0/1 labels.
double log_loss(std::span<const double> logits, std::span<const int> labels);

/// Newton-step gradient boosting on logistic loss with no base score.
/// Returns the kept trees (those up to the best validation round).
std::vector<Tree> fit_boosted_trees(const Matrix& x, std::span<const int> labels,
                                    const BoostingConfig& config, BoostingTrace& trace);

}  // namespace cts::reward
