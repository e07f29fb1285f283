#include "cts/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cts/error.hpp"

namespace cts::reward {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::size_t ProbOutput::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double RewardModel::raw_logit(std::span<const double> x) const {
  if (x.size() != n_features) {
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(n_features));
  }
  double z = 0.0;
  for (const auto& t : trees) z += learning_rate * t.predict(x);
  return z;
}

double RewardModel::positive_probability(std::span<const double> x) const {
  return sigmoid(raw_logit(x) / temperature);
}

ProbOutput RewardModel::predict_proba(std::span<const double> x) const {
  const double p = positive_probability(x);
  return ProbOutput{{1.0 - p, p}};
}

int RewardModel::predict(std::span<const double> x) const {
  return static_cast<int>(predict_proba(x).argmax());
}

nlohmann::json RewardModel::to_json() const {
  nlohmann::json trees_json = nlohmann::json::array();
  for (const auto& t : trees) trees_json.push_back(t.to_json());
  return {{"format", "cts-reward-model"},
          {"version", kModelFormatVersion},
          {"learning_rate", learning_rate},
          {"temperature", temperature},
          {"n_features", n_features},
          {"schema_hash", schema_hash},
          {"feature_schema", feature_schema},
          {"trees", std::move(trees_json)}};
}

RewardModel RewardModel::from_json(const nlohmann::json& j, const std::string& expected_schema_hash) {
  try {
    if (j.at("format").get<std::string>() != "cts-reward-model") {
      throw DataError("not a reward model file");
    }
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw DataError("unsupported reward model version " + j.at("version").dump());
    }
    RewardModel m;
    j.at("schema_hash").get_to(m.schema_hash);
    if (m.schema_hash != expected_schema_hash) {
      throw DataError("reward model schema hash " + m.schema_hash +
                      " does not match featurizer schema " + expected_schema_hash);
    }
    j.at("learning_rate").get_to(m.learning_rate);
    j.at("temperature").get_to(m.temperature);
    j.at("n_features").get_to(m.n_features);
    m.feature_schema = j.value("feature_schema", nlohmann::json::object());
    if (!(m.temperature > 0.0)) throw DataError("reward model temperature must be positive");
    for (const auto& t : j.at("trees")) {
      m.trees.push_back(Tree::from_json(t));
      for (int f : m.trees.back().feature) {
        if (f >= static_cast<int>(m.n_features)) throw DataError("tree feature index out of range");
      }
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed reward model: ") + e.what());
  }
}

void RewardModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << to_json().dump(1) << '\n';
}

RewardModel RewardModel::load(const std::filesystem::path& path,
                              const std::string& expected_schema_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("'" + path.string() + "' is not valid JSON");
  return from_json(j, expected_schema_hash);
}

std::size_t train_rows_for(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
}

RewardModel train(const Matrix& features, std::span<const int> labels,
                  const BoostingConfig& config) {
  RewardModel m;
  m.learning_rate = config.learning_rate;
  m.n_features = static_cast<std::size_t>(features.cols());
  m.trees = fit_boosted_trees(features, labels, config, m.trace);
  return m;
}

double temperature_nll(std::span<const double> logits, std::span<const int> labels, double t) {
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double m = (labels[i] == 1 ? -logits[i] : logits[i]) / t;
    total += m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
  }
  return total / static_cast<double>(logits.size());
}

double fit_temperature(std::span<const double> logits, std::span<const int> labels, double lower,
                       double upper, double tolerance) {
  if (logits.size() != labels.size()) throw std::invalid_argument("logit and label counts differ");
  const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!pos || !neg) throw DataError("temperature calibration needs both classes");

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lower, b = upper;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = temperature_nll(logits, labels, c), fd = temperature_nll(logits, labels, d);
  while (b - a > tolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = temperature_nll(logits, labels, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = temperature_nll(logits, labels, d);
    }
  }
  return 0.5 * (a + b);
}

RewardModel calibrate_temperature(RewardModel model, const Matrix& val_features,
                                  std::span<const int> val_labels) {
  if (val_features.rows() == 0) throw DataError("temperature calibration needs validation rows");
  std::vector<double> logits(static_cast<std::size_t>(val_features.rows()));
  for (Eigen::Index i = 0; i < val_features.rows(); ++i) {
    logits[static_cast<std::size_t>(i)] = model.raw_logit(row_of(val_features, i));
  }
  model.temperature = fit_temperature(logits, val_labels);
  return model;
}

double uncertainty_margin(const ProbOutput& probs) {
  double first = 0.0, second = 0.0;
  for (double p : probs.probs) {
    if (p > first) {
      second = first;
      first = p;
    } else if (p > second) {
      second = p;
    }
  }
  return 1.0 - (first - second);
}

double batch_uncertainty(const RewardModel& model, const Matrix& batch) {
  if (batch.rows() == 0) throw std::invalid_argument("batch_uncertainty needs a non-empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch.rows(); ++i) {
    total += uncertainty_margin(model.predict_proba(row_of(batch, i)));
  }
  return total / static_cast<double>(batch.rows());
}

double accuracy(const RewardModel& model, const Matrix& features, std::span<const int> labels) {
  if (features.rows() == 0) throw std::invalid_argument("accuracy needs a non-empty batch");
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    correct += static_cast<std::size_t>(model.predict(row_of(features, i)) ==
                                        labels[static_cast<std::size_t>(i)]);
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

}  // namespace cts::reward
