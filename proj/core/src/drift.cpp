#include "cts/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cts::drift {

DriftNormalizer DriftNormalizer::fit(std::span<const DriftMetrics> clean_batches,
                                     DriftWeights weights) {
  if (clean_batches.empty()) throw std::invalid_argument("drift normalizer needs clean batches");
  const double total = std::accumulate(weights.values.begin(), weights.values.end(), 0.0);
  if (!(total > 0.0) ||
      std::any_of(weights.values.begin(), weights.values.end(), [](double w) { return w < 0.0; })) {
    throw std::invalid_argument("drift weights must be non-negative with a positive sum");
  }
  DriftNormalizer n;
  n.initialized_ = true;
  n.lower_ = clean_batches.front().as_array();
  n.upper_ = n.lower_;
  for (const auto& m : clean_batches) {
    const auto v = m.as_array();
    for (std::size_t i = 0; i < 4; ++i) {
      n.lower_[i] = std::min(n.lower_[i], v[i]);
      n.upper_[i] = std::max(n.upper_[i], v[i]);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) n.weights_[i] = weights.values[i] / total;
  return n;
}

void DriftNormalizer::observe(const DriftMetrics& metrics) {
  const auto v = metrics.as_array();
  for (std::size_t i = 0; i < 4; ++i) upper_[i] = std::max(upper_[i], v[i]);
}

double DriftNormalizer::score(const DriftMetrics& metrics) const {
  if (!initialized_) throw std::logic_error("drift normalizer is not initialized");
  const auto v = metrics.as_array();
  double d = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double scaled;
    if (v[i] >= upper_[i]) {
      scaled = v[i] > lower_[i] ? 1.0 : 0.0;
    } else if (v[i] <= lower_[i]) {
      scaled = 0.0;
    } else {
      scaled = (v[i] - lower_[i]) / (upper_[i] - lower_[i]);
    }
    d += weights_[i] * scaled;
  }
  return std::clamp(d, 0.0, 1.0);
}

double drift_score(const DriftMetrics& metrics, const DriftNormalizer& normalizer) {
  return normalizer.score(metrics);
}

double drift_score(double psi, double jsd, double ae_delta, double tae_loss,
                   const DriftNormalizer& normalizer) {
  return normalizer.score(DriftMetrics{psi, jsd, ae_delta, tae_loss});
}

namespace {

std::vector<double> column_values(const Matrix& m, std::size_t index) {
  std::vector<double> values(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    values[static_cast<std::size_t>(i)] = m(i, static_cast<Eigen::Index>(index));
  }
  return values;
}

std::vector<double> label_values(std::span<const int> labels) {
  return {labels.begin(), labels.end()};
}

}  // namespace

ReferenceDistribution ReferenceDistribution::fit(const Matrix& features,
                                                 std::span<const int> labels,
                                                 std::vector<MonitoredColumn> columns,
                                                 std::size_t bins) {
  if (features.rows() == 0) throw std::invalid_argument("reference distribution needs rows");
  ReferenceDistribution ref;
  ref.columns_ = std::move(columns);
  for (const auto& c : ref.columns_) {
    const auto values = column_values(features, c.index);
    ref.reference_.push_back(
        c.categorical ? build_histogram(values, categorical_edges(c.max_code))
                      : build_histogram(values, std::nullopt, bins));
  }
  ref.label_reference_ = build_histogram(label_values(labels), categorical_edges(1));
  return ref;
}

ReferenceDistribution::Divergence ReferenceDistribution::compare(const Matrix& batch,
                                                                 std::span<const int> labels) const {
  if (batch.rows() == 0) throw std::invalid_argument("cannot compare an empty batch");
  Divergence out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto actual =
        build_histogram(column_values(batch, columns_[i].index), reference_[i].edges);
    out.psi += psi(reference_[i], actual);
    out.jsd += jsd(reference_[i], actual);
  }
  const auto label_actual = build_histogram(label_values(labels), label_reference_.edges);
  out.psi += psi(label_reference_, label_actual);
  out.jsd += jsd(label_reference_, label_actual);
  const auto count = static_cast<double>(monitored());
  out.psi /= count;
  out.jsd /= count;
  return out;
}

Matrix select_columns(const Matrix& m, std::span<const ScaledColumn> columns) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) =
        m.col(static_cast<Eigen::Index>(columns[j].index)) * columns[j].scale;
  }
  return out;
}

nlohmann::json to_json(const DriftMetrics& m) {
  return {{"psi", m.psi}, {"jsd", m.jsd}, {"ae_delta", m.ae_delta}, {"tae_loss", m.tae_loss}};
}

}  // namespace cts::drift
