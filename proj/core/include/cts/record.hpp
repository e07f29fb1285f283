#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cts {

/// Calendar date stored as days since 1970-01-01.
struct Date {
  std::int32_t days = 0;

  auto operator<=>(const Date&) const = default;

  /// Accepts ISO "YYYY-MM-DD" and "Month D, YYYY" (full or three-letter
  /// month names, case-insensitive). Returns nullopt for anything else,
  /// including impossible calendar dates.
  static std::optional<Date> parse(std::string_view text);

  std::string to_iso() const;
};

/// One labeled news item.
struct Record {
  std::string id;
  std::string title;
  std::string subject;
  std::string source;
  int protected_group = 0;  // 0 or 1
  Date date;
  int label = 0;  // 0 = fake, 1 = true

  bool operator==(const Record&) const = default;
};

/// Records that survived loading or cleaning, with a tally of dropped rows.
struct RecordSet {
  std::vector<Record> records;
  std::size_t dropped_count = 0;

  std::size_t size() const noexcept { return records.size(); }
};

/// Ordered partition of records into k sequential batches. Batches with
/// index < clean_prefix are never injected.
struct BatchSeries {
  std::vector<std::vector<Record>> batches;
  std::size_t clean_prefix = 1;

  std::size_t k() const noexcept { return batches.size(); }
  std::size_t total_records() const noexcept;
};

}  // namespace cts
