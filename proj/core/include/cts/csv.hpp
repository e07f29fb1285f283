#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cts::csv {

/// Streaming RFC 4180 reader: quoted fields may contain separators, doubled
/// quotes and line breaks. Lines starting with '#' outside a record are
/// treated as comments.
class Reader {
 public:
  explicit Reader(std::istream& in, char separator = ',') : in_(in), separator_(separator) {}

  /// Next record, or nullopt at end of input. Throws DataError on an
  /// unterminated quoted field.
  std::optional<std::vector<std::string>> next();

  /// 1-based line on which the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char separator_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a separator, quote or line break.
std::string escape(std::string_view field, char separator = ',');

/// Shortest round-trip decimal form of a double ("nan"/"inf" for non-finite).
std::string format_double(double value);

}  // namespace cts::csv
