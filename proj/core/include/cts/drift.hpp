#pragma once

#include <array>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/divergence.hpp"
#include "cts/matrix.hpp"

namespace cts::drift {

/// Raw drift metrics of one batch.
struct DriftMetrics {
  double psi = 0.0;       // nats, mean over monitored columns and the label
  double jsd = 0.0;       // nats, same averaging
  double ae_delta = 0.0;  // plain autoencoder error minus its training error
  double tae_loss = 0.0;  // attention autoencoder objective on the batch

  std::array<double, 4> as_array() const { return {psi, jsd, ae_delta, tae_loss}; }
};

/// Relative weight of each metric inside the drift score (normalized to sum 1).
struct DriftWeights {
  std::array<double, 4> values{0.25, 0.25, 0.25, 0.25};
};

/// Min-max scaling state for the drift score: lower bounds are the clean
/// prefix minima; upper bounds start at the clean prefix maxima and grow as
/// later batches are observed.
class DriftNormalizer {
 public:
  /// Throws std::invalid_argument for an empty clean set or invalid weights.
  static DriftNormalizer fit(std::span<const DriftMetrics> clean_batches, DriftWeights weights = {});

  bool initialized() const noexcept { return initialized_; }
  void observe(const DriftMetrics& metrics);
  double score(const DriftMetrics& metrics) const;

  const std::array<double, 4>& lower() const noexcept { return lower_; }
  const std::array<double, 4>& upper() const noexcept { return upper_; }

 private:
  bool initialized_ = false;
  std::array<double, 4> lower_{};
  std::array<double, 4> upper_{};
  std::array<double, 4> weights_{};
};

/// Weighted mean of the min-max scaled metrics, clamped to [0, 1]. A metric
/// whose bounds coincide scales to 0 at or below them and 1 above. Throws
/// std::logic_error when the normalizer is not initialized.
double drift_score(const DriftMetrics& metrics, const DriftNormalizer& normalizer);
double drift_score(double psi, double jsd, double ae_delta, double tae_loss,
                   const DriftNormalizer& normalizer);

/// One monitored column of the feature matrix.
struct MonitoredColumn {
  std::size_t index = 0;
  bool categorical = false;
  int max_code = 0;  // categorical columns only
};

/// Reference histograms of the clean prefix; batches are binned on the same
/// edges.
class ReferenceDistribution {
 public:
  static ReferenceDistribution fit(const Matrix& features, std::span<const int> labels,
                                   std::vector<MonitoredColumn> columns,
                                   std::size_t bins = kDefaultBins);

  struct Divergence {
    double psi = 0.0;
    double jsd = 0.0;
  };

  /// Mean PSI and JSD over the monitored columns and the label distribution.
  Divergence compare(const Matrix& batch, std::span<const int> labels) const;

  std::size_t monitored() const noexcept { return columns_.size() + 1; }

 private:
  std::vector<MonitoredColumn> columns_;
  std::vector<Histogram> reference_;
  Histogram label_reference_;
};

/// Column index plus multiplier used to assemble autoencoder inputs.
struct ScaledColumn {
  std::size_t index = 0;
  double scale = 1.0;
};

Matrix select_columns(const Matrix& m, std::span<const ScaledColumn> columns);

nlohmann::json to_json(const DriftMetrics& metrics);

}  // namespace cts::drift
