#include "cts/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "cts/csv.hpp"
#include "cts/error.hpp"
#include "cts/random.hpp"

namespace cts {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<Date> from_ymd(int y, unsigned m, unsigned d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

bool parse_uint(std::string_view s, int& out) {
  if (s.empty() || s.size() > 9) return false;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  text = trim(text);
  // ISO form.
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    int y, m, d;
    if (parse_uint(text.substr(0, 4), y) && parse_uint(text.substr(5, 2), m) &&
        parse_uint(text.substr(8, 2), d)) {
      return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    }
    return std::nullopt;
  }
  // "Month D, YYYY".
  static constexpr std::array<std::string_view, 12> kMonths = {
      "january", "february", "march",     "april",   "may",      "june",
      "july",    "august",   "september", "october", "november", "december"};
  const auto space = text.find(' ');
  const auto comma = text.find(',');
  if (space == std::string_view::npos || comma == std::string_view::npos || comma < space) {
    return std::nullopt;
  }
  const std::string month = lower(text.substr(0, space));
  unsigned month_index = 0;
  for (unsigned i = 0; i < kMonths.size(); ++i) {
    if (month == kMonths[i] || (month.size() == 3 && kMonths[i].substr(0, 3) == month)) {
      month_index = i + 1;
      break;
    }
  }
  int d, y;
  if (month_index == 0 || !parse_uint(trim(text.substr(space + 1, comma - space - 1)), d) ||
      !parse_uint(trim(text.substr(comma + 1)), y)) {
    return std::nullopt;
  }
  return from_ymd(y, month_index, static_cast<unsigned>(d));
}

std::string Date::to_iso() const {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::size_t BatchSeries::total_records() const noexcept {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.size();
  return n;
}

namespace ingest {

void Schema::validate() const {
  const std::array<std::pair<std::string_view, const std::string*>, 5> required = {{
      {"title", &title}, {"subject", &subject}, {"source", &source}, {"date", &date},
      {"label", &label}}};
  for (const auto& [role, column] : required) {
    if (trim(*column).empty()) {
      throw ConfigError("schema role '" + std::string(role) + "' is not mapped to a column");
    }
  }
}

std::optional<int> parse_label(std::string_view token) {
  const std::string t = lower(trim(token));
  if (t == "fake") return 0;
  if (t == "true") return 1;
  return std::nullopt;
}

namespace {

// Column values for one input row, looked up by role.
struct RawRow {
  std::string id, title, subject, source, protected_group, date, label;
};

class RowBuilder {
 public:
  explicit RowBuilder(const LoadOptions& options) : options_(options) {}

  void add(const RawRow& raw, std::size_t row_number) {
    auto label = parse_label(raw.label);
    auto date = Date::parse(raw.date);
    if (trim(raw.title).empty() || !label || !date) {
      ++result_.dropped_count;
      return;
    }
    Record r;
    if (trim(raw.id).empty()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "row-%08zu", row_number);
      r.id = buf;
    } else {
      r.id = std::string(trim(raw.id));
    }
    if (options_.schema.protected_group.empty()) {
      r.protected_group =
          static_cast<int>(mix64(options_.protected_seed ^ fnv1a64(r.id)) & 1U);
    } else {
      const auto p = trim(raw.protected_group);
      if (p == "0") {
        r.protected_group = 0;
      } else if (p == "1") {
        r.protected_group = 1;
      } else {
        ++result_.dropped_count;
        return;
      }
    }
    r.title = raw.title;
    r.subject = std::string(trim(raw.subject));
    r.source = std::string(trim(raw.source));
    r.date = *date;
    r.label = *label;
    result_.records.push_back(std::move(r));
  }

  void drop() { ++result_.dropped_count; }

  RecordSet finish() {
    if (result_.records.empty()) {
      throw DataError("zero surviving rows (" + std::to_string(result_.dropped_count) +
                      " dropped)");
    }
    return std::move(result_);
  }

 private:
  const LoadOptions& options_;
  RecordSet result_;
};

RecordSet load_csv(std::istream& in, const LoadOptions& options) {
  csv::Reader reader(in);
  RowBuilder builder(options);
  auto header = reader.next();
  if (!header) throw DataError("zero surviving rows (input has no header)");

  std::map<std::string, std::size_t, std::less<>> columns;
  for (std::size_t i = 0; i < header->size(); ++i) {
    columns.emplace(std::string(trim((*header)[i])), i);
  }
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    if (name.empty()) return std::nullopt;
    auto it = columns.find(name);
    if (it == columns.end()) throw DataError("column '" + name + "' not found in input header");
    return it->second;
  };
  const auto& s = options.schema;
  const auto c_title = column_of(s.title), c_subject = column_of(s.subject),
             c_source = column_of(s.source), c_date = column_of(s.date),
             c_label = column_of(s.label), c_id = column_of(s.id),
             c_protected = column_of(s.protected_group);

  std::size_t row_number = 0;
  while (auto fields = reader.next()) {
    ++row_number;
    if (fields->size() != header->size()) {
      builder.drop();
      continue;
    }
    auto get = [&](const std::optional<std::size_t>& c) {
      return c ? (*fields)[*c] : std::string();
    };
    builder.add(RawRow{get(c_id), get(c_title), get(c_subject), get(c_source), get(c_protected),
                       get(c_date), get(c_label)},
                row_number);
  }
  return builder.finish();
}

RecordSet load_jsonl(std::istream& in, const LoadOptions& options) {
  RowBuilder builder(options);
  const auto& s = options.schema;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    const auto obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!obj.is_object()) {
      builder.drop();
      continue;
    }
    auto get = [&](const std::string& key) -> std::string {
      if (key.empty()) return {};
      auto it = obj.find(key);
      if (it == obj.end() || it->is_null()) return {};
      return it->is_string() ? it->get<std::string>() : it->dump();
    };
    builder.add(RawRow{get(s.id), get(s.title), get(s.subject), get(s.source),
                       get(s.protected_group), get(s.date), get(s.label)},
                row_number);
  }
  return builder.finish();
}

}  // namespace

RecordSet load_records(std::istream& in, const LoadOptions& options) {
  options.schema.validate();
  return options.format == InputFormat::kCsv ? load_csv(in, options) : load_jsonl(in, options);
}

RecordSet load_records(const std::filesystem::path& path, const LoadOptions& options) {
  options.schema.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read input file '" + path.string() + "'");
  return load_records(in, options);
}

std::string clean_title(std::string_view title) {
  std::string out;
  out.reserve(title.size());
  bool pending_space = false;
  for (char raw : title) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

RecordSet clean_normalize(RecordSet records, double lower_q, double upper_q) {
  RecordSet out;
  out.dropped_count = records.dropped_count;
  out.records.reserve(records.records.size());
  for (auto& r : records.records) {
    r.title = clean_title(r.title);
    if (r.title.empty()) {
      ++out.dropped_count;
      continue;
    }
    out.records.push_back(std::move(r));
  }
  if (out.records.empty()) return out;

  // Order statistic at rank round((n-1)q): clipping to it leaves the same
  // statistic in place, so a second pass is a no-op.
  std::vector<std::int32_t> days;
  days.reserve(out.records.size());
  for (const auto& r : out.records) days.push_back(r.date.days);
  std::sort(days.begin(), days.end());
  auto rank = [&](double q) {
    return static_cast<std::size_t>(std::lround(static_cast<double>(days.size() - 1) * q));
  };
  const std::int32_t lo = days[rank(lower_q)];
  const std::int32_t hi = days[rank(upper_q)];
  for (auto& r : out.records) r.date.days = std::clamp(r.date.days, lo, hi);
  return out;
}

BatchSeries partition_batches(const RecordSet& records, std::size_t k, std::size_t clean_prefix) {
  const std::size_t n = records.size();
  if (k < 2) throw DataError("batch count k must be at least 2");
  if (k > n) {
    throw DataError("batch count k=" + std::to_string(k) + " exceeds record count " +
                    std::to_string(n));
  }
  if (clean_prefix < 1 || clean_prefix > k) {
    throw DataError("clean_prefix must lie in [1, k]");
  }
  std::vector<Record> sorted = records.records;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Record& a, const Record& b) {
    if (a.date != b.date) return a.date < b.date;
    return a.id < b.id;
  });

  BatchSeries series;
  series.clean_prefix = clean_prefix;
  series.batches.resize(k);
  const std::size_t base = n / k;
  const std::size_t larger = n % k;  // the last `larger` batches get one extra
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t size = base + (b >= k - larger ? 1 : 0);
    auto first = sorted.begin() + static_cast<std::ptrdiff_t>(cursor);
    series.batches[b].assign(std::make_move_iterator(first),
                             std::make_move_iterator(first + static_cast<std::ptrdiff_t>(size)));
    cursor += size;
  }
  return series;
}

void dump_records_jsonl(const std::filesystem::path& path, std::span<const Record> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& r : records) {
    nlohmann::json j = {{"id", r.id},           {"title", r.title},
                        {"subject", r.subject}, {"source", r.source},
                        {"protected", r.protected_group},
                        {"date", r.date.to_iso()},
                        {"label", r.label}};
    out << j.dump() << '\n';
  }
}

}  // namespace ingest
}  // namespace cts
