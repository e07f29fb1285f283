#include "cts/featurize.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "cts/random.hpp"

namespace cts {

std::vector<double> FeatureVector::dense() const {
  std::vector<double> out(values);
  out.reserve(values.size() + categorical_codes.size());
  for (int c : categorical_codes) out.push_back(static_cast<double>(c));
  return out;
}

std::vector<FeatureGroup> FeatureLayout::groups() const {
  FeatureGroup text{"text", {}};
  text.columns.resize(text_dim);
  for (std::size_t i = 0; i < text_dim; ++i) text.columns[i] = i;
  return {std::move(text),
          {"subject", {subject_column()}},
          {"source", {source_column()}},
          {"protected", {protected_column()}},
          {"date", {date_column()}}};
}

std::vector<std::string_view> tokenize(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) tokens.push_back(s.substr(start, i - start));
  }
  return tokens;
}

std::size_t token_bucket(std::string_view token, std::uint64_t seed, std::size_t dim) {
  return static_cast<std::size_t>(mix64(fnv1a64(token) ^ seed) % dim);
}

namespace {

std::vector<double> token_counts(std::string_view title, const FeaturizerOptions& options) {
  std::vector<double> counts(options.dim, 0.0);
  for (auto token : tokenize(title)) counts[token_bucket(token, options.hash_seed, options.dim)] += 1.0;
  return counts;
}

std::map<std::string, int, std::less<>> ordinal_codes(std::set<std::string> values) {
  values.erase("");
  std::map<std::string, int, std::less<>> codes;
  int next = 1;
  for (auto& v : values) codes.emplace(v, next++);
  return codes;
}

int lookup(const std::map<std::string, int, std::less<>>& codes, std::string_view value) {
  if (value.empty()) return 0;
  auto it = codes.find(value);
  return it == codes.end() ? static_cast<int>(codes.size()) + 1 : it->second;
}

}  // namespace

Featurizer Featurizer::fit(std::span<const Record> training, Date first, Date last,
                           FeaturizerOptions options) {
  if (options.dim < 8) throw std::invalid_argument("featurizer dim must be at least 8");
  Featurizer f;
  f.options_ = options;
  f.layout_.text_dim = options.dim;
  f.first_ = first;
  f.last_ = last;
  f.text_scale_.assign(options.dim, 0.0);
  std::set<std::string> subjects, sources;
  for (const auto& r : training) {
    const auto counts = token_counts(r.title, options);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      f.text_scale_[i] = std::max(f.text_scale_[i], counts[i]);
    }
    subjects.insert(r.subject);
    sources.insert(r.source);
  }
  f.subjects_ = ordinal_codes(std::move(subjects));
  f.sources_ = ordinal_codes(std::move(sources));
  return f;
}

int Featurizer::subject_code(std::string_view subject) const { return lookup(subjects_, subject); }
int Featurizer::source_code(std::string_view source) const { return lookup(sources_, source); }

FeatureVector Featurizer::transform(const Record& record) const {
  FeatureVector fv;
  fv.values = token_counts(record.title, options_);
  for (std::size_t i = 0; i < fv.values.size(); ++i) {
    if (text_scale_[i] > 0.0) fv.values[i] /= text_scale_[i];
  }
  const double span = static_cast<double>(last_.days - first_.days);
  double t = span > 0.0 ? static_cast<double>(record.date.days - first_.days) / span : 0.0;
  fv.values.push_back(std::clamp(t, 0.0, 1.0));
  fv.categorical_codes = {subject_code(record.subject), source_code(record.source),
                          record.protected_group};
  return fv;
}

std::vector<FeatureVector> Featurizer::transform(std::span<const Record> records) const {
  std::vector<FeatureVector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(transform(r));
  return out;
}

nlohmann::json Featurizer::schema() const {
  nlohmann::json j;
  j["dim"] = options_.dim;
  j["hash_seed"] = options_.hash_seed;
  j["text_scale"] = text_scale_;
  j["subjects"] = subjects_;
  j["sources"] = sources_;
  j["date_first"] = first_.to_iso();
  j["date_last"] = last_.to_iso();
  return j;
}

std::string Featurizer::schema_hash() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(schema().dump())));
  return buf;
}

}  // namespace cts
