#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cts/autoencoder.hpp"
#include "cts/drift.hpp"
#include "cts/featurize.hpp"
#include "cts/gbdt.hpp"
#include "cts/ingest.hpp"
#include "cts/trust.hpp"

namespace cts::pipeline {

/// Everything a run depends on. Parsed from a `key = value` file where '#'
/// starts a comment; relative paths resolve against the file's directory.
struct RunConfig {
  std::filesystem::path input_path;
  ingest::InputFormat input_format = ingest::InputFormat::kCsv;
  ingest::Schema schema;

  std::size_t k = 10;
  std::size_t clean_prefix = 5;

  bool inject_enabled = true;
  std::vector<std::size_t> inject_batches;  // 0-based
  std::string skew_subject = "politics";    // empty disables subject skew
  double skew_factor = 2.0;
  std::filesystem::path lexicon_path;  // empty selects the built-in lexicon
  double framing_rate = 0.5;
  std::vector<double> label_drift{0.8};  // empty disables label drift

  FeaturizerOptions features;
  reward::BoostingConfig model;
  drift::AutoencoderConfig ae;
  drift::AutoencoderConfig tae;
  drift::DriftWeights drift_weights;
  trust::TrustWeights trust_weights;
  double lambda = 0.5;
  double alert_threshold = 0.7;
  std::size_t importance_repeats = 5;

  std::uint64_t seed = 7;
  std::filesystem::path output_dir = "cts-out";
  bool dump_cleaned = false;

  /// Bytes of the configuration file exactly as read.
  std::string source_text;

  RunConfig();

  /// Checks every range and that referenced files exist. Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError for unknown or repeated keys and unparseable values.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Commented template listing every key with its default.
std::string config_template();

/// Parses "6-10", "6,7,9" or "6-8,10" (1-based) into sorted 0-based indices.
std::vector<std::size_t> parse_batch_list(std::string_view text);

}  // namespace cts::pipeline
