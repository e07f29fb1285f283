#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/record.hpp"

namespace cts {

/// Numeric view of one record.
///
/// `values` holds the hashed title block followed by the normalized date;
/// `categorical_codes` holds the subject, source and protected codes. The
/// model consumes both through dense().
struct FeatureVector {
  std::vector<double> values;
  std::vector<int> categorical_codes;

  std::vector<double> dense() const;
  bool operator==(const FeatureVector&) const = default;
};

/// A named set of dense columns, used for attribution and drift inputs.
struct FeatureGroup {
  std::string name;
  std::vector<std::size_t> columns;
};

/// Column positions inside FeatureVector::dense().
struct FeatureLayout {
  std::size_t text_dim = 0;

  std::size_t date_column() const { return text_dim; }
  std::size_t subject_column() const { return text_dim + 1; }
  std::size_t source_column() const { return text_dim + 2; }
  std::size_t protected_column() const { return text_dim + 3; }
  std::size_t width() const { return text_dim + 4; }

  /// text, subject, source, protected, date.
  std::vector<FeatureGroup> groups() const;
};

/// Bucket of a token in the hashed bag-of-tokens block:
/// mix64(fnv1a64(token) ^ seed) mod dim.
std::size_t token_bucket(std::string_view token, std::uint64_t seed, std::size_t dim);

struct FeaturizerOptions {
  std::size_t dim = 256;
  std::uint64_t hash_seed = 17;
};

/// Fitted featurizer. Text components are token counts divided by their
/// maximum over the training split (components never seen stay unscaled at
/// zero); categorical codes are 0 for an empty value, 1..m for the sorted
/// training values and m+1 for values unseen in training; the date maps
/// linearly onto [0, 1] over the supplied range.
class Featurizer {
 public:
  /// Throws std::invalid_argument when dim < 8.
  static Featurizer fit(std::span<const Record> training, Date first, Date last,
                        FeaturizerOptions options = {});

  FeatureVector transform(const Record& record) const;
  std::vector<FeatureVector> transform(std::span<const Record> records) const;

  const FeatureLayout& layout() const noexcept { return layout_; }
  const FeaturizerOptions& options() const noexcept { return options_; }

  int subject_code(std::string_view subject) const;
  int source_code(std::string_view source) const;
  std::size_t subject_cardinality() const noexcept { return subjects_.size() + 2; }
  std::size_t source_cardinality() const noexcept { return sources_.size() + 2; }

  /// Canonical description of everything transform() depends on.
  nlohmann::json schema() const;
  /// Hex digest of schema(); models refuse to load against a different one.
  std::string schema_hash() const;

 private:
  FeaturizerOptions options_;
  FeatureLayout layout_;
  std::vector<double> text_scale_;
  std::map<std::string, int, std::less<>> subjects_;
  std::map<std::string, int, std::less<>> sources_;
  Date first_;
  Date last_;
};

/// Whitespace tokens of a cleaned title.
std::vector<std::string_view> tokenize(std::string_view cleaned_title);

}  // namespace cts
