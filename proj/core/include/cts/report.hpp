#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/drift.hpp"
#include "cts/trust.hpp"

namespace cts::report {

/// Everything measured on one batch. `batch` is 0-based in memory and
/// written 1-based.
struct BatchRow {
  std::size_t batch = 0;
  std::size_t records = 0;
  bool injected = false;
  double accuracy = 0.0;
  drift::DriftMetrics metrics;
  trust::TrustComponents components;  // components.drift is the drift score
  double trust = 0.0;
  double smoothed = 0.0;
};

struct ModelSummary {
  std::size_t trees = 0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  double temperature = 1.0;
  double validation_accuracy = 0.0;
  std::vector<double> repeat_validation_accuracy;
  std::string schema_hash;
};

struct DriftSummary {
  std::array<double, 4> lower{};
  std::array<double, 4> upper{};
  double ae_reference_error = 0.0;
  double ae_final_training_loss = 0.0;
  double tae_final_training_loss = 0.0;
};

/// Deterministic run summary: it holds no wall-clock data, so identical
/// config and input bytes give identical report bytes.
struct RunReport {
  std::string tool_version;
  std::string config_text;
  std::uint64_t seed = 0;
  std::string provenance;  // "synthetic" or "user-supplied"
  std::string input_name;  // file name only
  std::size_t loaded = 0;
  std::size_t dropped_on_load = 0;
  std::size_t dropped_on_clean = 0;
  std::size_t k = 0;
  std::size_t clean_prefix = 0;
  std::vector<std::size_t> injected_batches;  // 0-based
  /// batch (0-based) -> operation -> count.
  std::map<std::size_t, std::map<std::string, std::size_t>> audit_counts;
  ModelSummary model;
  DriftSummary drift;
  trust::TrustWeights trust_weights;
  double lambda = 0.5;
  double alert_threshold = 0.7;
  std::vector<BatchRow> batches;
  std::vector<std::size_t> alerts;  // 0-based
  std::size_t importance_repeats = 0;
  std::vector<trust::FeatureImportance> importance;

  nlohmann::json to_json() const;
  /// Throws DataError for a document of another format or version.
  static RunReport from_json(const nlohmann::json& j);
  static RunReport load(const std::filesystem::path& path);
};

inline constexpr int kReportFormatVersion = 1;

/// Pearson correlation; 0 when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Names of the metrics entering the correlation matrix, in order.
const std::vector<std::string>& correlation_metrics();
/// Correlations across batches of psi, jsd, ae_delta, u_bar, R, C, E and T.
/// The diagonal is 1.
std::vector<std::vector<double>> metric_correlation(const RunReport& report);

void write_trust_csv(const RunReport& report, const std::filesystem::path& path);
void write_drift_csv(const RunReport& report, const std::filesystem::path& path);

/// plots/: drift_vs_error.csv, trust_by_batch.csv, feature_importance.csv,
/// metric_correlation.csv.
void write_plots(const RunReport& report, const std::filesystem::path& dir);

/// report.json, the CSV/JSON tables and plots/ under `dir`.
void write_all(const RunReport& report, const std::filesystem::path& dir);

}  // namespace cts::report
