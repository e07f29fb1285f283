#include "cts/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "cts/error.hpp"

namespace cts {

Matrix to_matrix(std::span<const FeatureVector> features) {
  if (features.empty()) return Matrix(0, 0);
  const auto width = static_cast<Eigen::Index>(features.front().values.size() +
                                               features.front().categorical_codes.size());
  Matrix m(static_cast<Eigen::Index>(features.size()), width);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto row = features[i].dense();
    if (static_cast<Eigen::Index>(row.size()) != width) {
      throw std::invalid_argument("feature vectors differ in dimension");
    }
    for (Eigen::Index c = 0; c < width; ++c) m(static_cast<Eigen::Index>(i), c) = row[c];
  }
  return m;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

namespace reward {

double Tree::predict(std::span<const double> x) const {
  int node = 0;
  while (feature[node] >= 0) {
    node = x[static_cast<std::size_t>(feature[node])] <= threshold[node] ? left[node] : right[node];
  }
  return value[node];
}

bool Tree::splits_on(std::size_t column) const {
  return std::find(feature.begin(), feature.end(), static_cast<int>(column)) != feature.end();
}

nlohmann::json Tree::to_json() const {
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value}};
}

Tree Tree::from_json(const nlohmann::json& j) {
  Tree t;
  j.at("feature").get_to(t.feature);
  j.at("threshold").get_to(t.threshold);
  j.at("left").get_to(t.left);
  j.at("right").get_to(t.right);
  j.at("value").get_to(t.value);
  const std::size_t n = t.feature.size();
  if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
      t.value.size() != n) {
    throw DataError("malformed tree arrays");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.feature[i] >= 0 && (t.left[i] <= static_cast<int>(i) || t.right[i] <= static_cast<int>(i) ||
                              t.left[i] >= static_cast<int>(n) || t.right[i] >= static_cast<int>(n))) {
      throw DataError("malformed tree child index");
    }
  }
  return t;
}

double log_loss(std::span<const double> logits, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    // log(1 + exp(-s z)) with s = +/-1.
    const double m = labels[i] == 1 ? -logits[i] : logits[i];
    total += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  }
  return logits.empty() ? 0.0 : total / static_cast<double>(logits.size());
}

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Training matrix quantized to per-feature bins. Split thresholds sit midway
/// between neighbouring candidate values, so bin <= j iff x <= threshold[j].
class BinnedMatrix {
 public:
  BinnedMatrix(const Matrix& x, std::size_t max_bins) : rows_(static_cast<std::size_t>(x.rows())) {
    const auto cols = static_cast<std::size_t>(x.cols());
    thresholds_.resize(cols);
    offsets_.resize(cols + 1, 0);
    bins_.resize(rows_ * cols);
    std::vector<double> column(rows_);
    for (std::size_t f = 0; f < cols; ++f) {
      for (std::size_t i = 0; i < rows_; ++i) column[i] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
      std::vector<double> uniq(column);
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      if (uniq.size() > max_bins) {
        std::vector<double> picked;
        for (std::size_t b = 0; b < max_bins; ++b) {
          picked.push_back(uniq[(b * (uniq.size() - 1)) / (max_bins - 1)]);
        }
        picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
        uniq = std::move(picked);
      }
      auto& t = thresholds_[f];
      for (std::size_t j = 0; j + 1 < uniq.size(); ++j) t.push_back(0.5 * (uniq[j] + uniq[j + 1]));
      offsets_[f + 1] = offsets_[f] + t.size() + 1;
      for (std::size_t i = 0; i < rows_; ++i) {
        bins_[i * cols + f] = static_cast<std::uint16_t>(
            std::lower_bound(t.begin(), t.end(), column[i]) - t.begin());
      }
    }
  }

  std::size_t cols() const { return thresholds_.size(); }
  std::size_t total_bins() const { return offsets_.back(); }
  std::size_t offset(std::size_t f) const { return offsets_[f]; }
  std::size_t bin_count(std::size_t f) const { return thresholds_[f].size() + 1; }
  std::uint16_t bin(std::size_t row, std::size_t f) const { return bins_[row * cols() + f]; }
  double threshold(std::size_t f, std::size_t j) const { return thresholds_[f][j]; }

 private:
  std::size_t rows_;
  std::vector<std::vector<double>> thresholds_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint16_t> bins_;
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedMatrix& bins, std::span<const double> grad, std::span<const double> hess,
              const BoostingConfig& config)
      : bins_(bins), grad_(grad), hess_(hess), config_(config),
        hist_g_(bins.total_bins()), hist_h_(bins.total_bins()) {}

  Tree build(std::vector<std::size_t> rows) {
    tree_ = Tree{};
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int add_leaf(double g, double h) {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.push_back(-g / (h + config_.l2));
    return static_cast<int>(tree_.feature.size()) - 1;
  }

  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    if (depth >= config_.depth || rows.size() < 2) return add_leaf(g, h);

    std::fill(hist_g_.begin(), hist_g_.end(), 0.0);
    std::fill(hist_h_.begin(), hist_h_.end(), 0.0);
    const std::size_t cols = bins_.cols();
    for (auto r : rows) {
      for (std::size_t f = 0; f < cols; ++f) {
        const std::size_t slot = bins_.offset(f) + bins_.bin(r, f);
        hist_g_[slot] += grad_[r];
        hist_h_[slot] += hess_[r];
      }
    }

    const double parent_score = g * g / (h + config_.l2);
    double best_gain = 1e-12;
    std::size_t best_feature = 0, best_bin = 0;
    bool found = false;
    for (std::size_t f = 0; f < cols; ++f) {
      double gl = 0.0, hl = 0.0;
      const std::size_t nb = bins_.bin_count(f);
      for (std::size_t j = 0; j + 1 < nb; ++j) {
        gl += hist_g_[bins_.offset(f) + j];
        hl += hist_h_[bins_.offset(f) + j];
        const double gr = g - gl, hr = h - hl;
        if (hl < config_.min_child_hessian || hr < config_.min_child_hessian) continue;
        const double gain =
            gl * gl / (hl + config_.l2) + gr * gr / (hr + config_.l2) - parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_bin = j;
          found = true;
        }
      }
    }
    if (!found) return add_leaf(g, h);

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      (bins_.bin(r, best_feature) <= best_bin ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int node = static_cast<int>(tree_.feature.size());
    tree_.feature.push_back(static_cast<int>(best_feature));
    tree_.threshold.push_back(bins_.threshold(best_feature, best_bin));
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.push_back(0.0);
    const int l = grow(std::move(left_rows), depth + 1);
    const int r = grow(std::move(right_rows), depth + 1);
    tree_.left[node] = l;
    tree_.right[node] = r;
    return node;
  }

  const BinnedMatrix& bins_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const BoostingConfig& config_;
  std::vector<double> hist_g_;
  std::vector<double> hist_h_;
  Tree tree_;
};

struct FitResult {
  std::vector<Tree> trees;
  BoostingTrace trace;
};

FitResult fit_split(const Matrix& x, std::span<const int> labels, std::size_t train_rows,
                    std::size_t validation_end, const BoostingConfig& config) {
  FitResult out;
  auto& trace = out.trace;
  trace.train_rows = train_rows;
  trace.validation_rows = validation_end - train_rows;

  const Matrix train_x = x.topRows(static_cast<Eigen::Index>(train_rows));
  const BinnedMatrix bins(train_x, config.max_bins);
  std::vector<double> train_logit(train_rows, 0.0), val_logit(trace.validation_rows, 0.0);
  const auto train_y = labels.first(train_rows);
  const auto val_y = labels.subspan(train_rows, trace.validation_rows);

  trace.train_loss.push_back(log_loss(train_logit, train_y));
  trace.validation_loss.push_back(log_loss(val_logit, val_y));
  double best_val = trace.validation_loss.back();

  std::vector<double> grad(train_rows), hess(train_rows);
  std::vector<std::size_t> all_rows(train_rows);
  for (std::size_t i = 0; i < train_rows; ++i) all_rows[i] = i;
  TreeBuilder builder(bins, grad, hess, config);

  for (std::size_t round = 1; round <= config.n_trees; ++round) {
    for (std::size_t i = 0; i < train_rows; ++i) {
      const double p = sigmoid(train_logit[i]);
      grad[i] = p - train_y[i];
      hess[i] = p * (1.0 - p);
    }
    Tree tree = builder.build(all_rows);
    for (std::size_t i = 0; i < train_rows; ++i) {
      train_logit[i] += config.learning_rate * tree.predict(row_of(x, static_cast<Eigen::Index>(i)));
    }
    for (std::size_t i = 0; i < trace.validation_rows; ++i) {
      val_logit[i] += config.learning_rate *
                      tree.predict(row_of(x, static_cast<Eigen::Index>(train_rows + i)));
    }
    out.trees.push_back(std::move(tree));
    trace.train_loss.push_back(log_loss(train_logit, train_y));
    trace.validation_loss.push_back(log_loss(val_logit, val_y));
    if (!std::isfinite(trace.train_loss.back())) {
      throw NumericError("boosting loss became non-finite at round " + std::to_string(round));
    }
    if (trace.validation_loss.back() < best_val) {
      best_val = trace.validation_loss.back();
      trace.best_round = round;
    } else if (round - trace.best_round >= config.early_stop_patience) {
      break;
    }
  }
  out.trees.resize(trace.best_round);
  return out;
}

double accuracy_on(const std::vector<Tree>& trees, double lr, const Matrix& x,
                   std::span<const int> labels, std::size_t begin, std::size_t end) {
  std::size_t correct = 0;
  for (std::size_t i = begin; i < end; ++i) {
    double z = 0.0;
    for (const auto& t : trees) z += lr * t.predict(row_of(x, static_cast<Eigen::Index>(i)));
    correct += static_cast<std::size_t>((z > 0.0 ? 1 : 0) == labels[i]);
  }
  return end > begin ? static_cast<double>(correct) / static_cast<double>(end - begin) : 0.0;
}

}  // namespace

std::vector<Tree> fit_boosted_trees(const Matrix& x, std::span<const int> labels,
                                    const BoostingConfig& config, BoostingTrace& trace) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (labels.size() != n) throw std::invalid_argument("feature and label counts differ");
  if (n < 20) throw DataError("reward model needs at least 20 samples, got " + std::to_string(n));
  if (config.depth < 1 || config.n_trees < 1 || !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("invalid boosting configuration");
  }
  if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  }
  if (config.max_bins < 2 || config.max_bins > 65535) {
    throw std::invalid_argument("max_bins must lie in [2, 65535]");
  }
  const auto train_rows = static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(n)));
  if (train_rows == 0 || train_rows >= n) throw DataError("train/validation split is empty");
  bool has_pos = false, has_neg = false;
  for (std::size_t i = 0; i < train_rows; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("labels must be 0 or 1");
    (labels[i] == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DataError("training split contains a single class");

  FitResult main = fit_split(x, labels, train_rows, n, config);
  trace = std::move(main.trace);

  // Rolling-origin repeats: each moves the validation window one window
  // earlier and refits on everything before it.
  const std::size_t window = n - train_rows;
  trace.repeat_validation_accuracy.push_back(
      accuracy_on(main.trees, config.learning_rate, x, labels, train_rows, n));
  for (std::size_t r = 1; r < config.validation_repeats; ++r) {
    if (train_rows <= r * window + 1) break;
    const std::size_t cut = train_rows - r * window;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < cut; ++i) (labels[i] == 1 ? pos : neg) = true;
    if (!pos || !neg) break;
    FitResult repeat = fit_split(x, labels, cut, cut + window, config);
    trace.repeat_validation_accuracy.push_back(
        accuracy_on(repeat.trees, config.learning_rate, x, labels, cut, cut + window));
  }
  return std::move(main.trees);
}

}  // namespace reward
}  // namespace cts
