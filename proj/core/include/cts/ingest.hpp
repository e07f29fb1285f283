#pragma once

#include <filesystem>
#include <istream>
#include <span>
#include <string>

#include "cts/record.hpp"

namespace cts::ingest {

/// Maps record roles to input column names. title, subject, source, date and
/// label are required; an empty id column numbers rows, an empty protected
/// column synthesizes a seeded Bernoulli(0.5) attribute.
struct Schema {
  std::string title = "title";
  std::string subject = "subject";
  std::string source = "source";
  std::string date = "date";
  std::string label = "label";
  std::string id;
  std::string protected_group;

  /// Throws ConfigError when a required role is unmapped.
  void validate() const;
};

enum class InputFormat { kCsv, kJsonLines };

struct LoadOptions {
  Schema schema;
  InputFormat format = InputFormat::kCsv;
  std::uint64_t protected_seed = 0;
};

/// Parses a label token: "fake" -> 0, "true" -> 1 (case-insensitive, trimmed).
std::optional<int> parse_label(std::string_view token);

/// Loads all parseable rows. Rows with an empty title, unknown label token,
/// unparseable date or non-binary protected value are dropped and counted.
/// Throws DataError for an unreadable file, a mapped column missing from the
/// input, or zero surviving rows; ConfigError for an unmapped required role.
RecordSet load_records(const std::filesystem::path& path, const LoadOptions& options);
RecordSet load_records(std::istream& in, const LoadOptions& options);

/// Lowercase, strip ASCII punctuation, collapse whitespace.
std::string clean_title(std::string_view title);

/// Cleans every title and clips dates to the [lower_q, upper_q] quantiles of
/// the date distribution (linear interpolation between order statistics,
/// rounded to the nearest day). Records whose title is empty after cleaning
/// are dropped and counted. Idempotent.
RecordSet clean_normalize(RecordSet records, double lower_q = 0.01, double upper_q = 0.99);

/// Sorts by (date, id) and splits into k contiguous batches whose sizes
/// differ by at most one; the larger batches come last.
/// Throws DataError when k < 2, k > |records| or clean_prefix is outside [1, k].
BatchSeries partition_batches(const RecordSet& records, std::size_t k, std::size_t clean_prefix);

/// Writes cleaned records as JSON lines (debug dump).
void dump_records_jsonl(const std::filesystem::path& path, std::span<const Record> records);

}  // namespace cts::ingest
