#include "cts/bias_lab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cts/error.hpp"
#include "cts/featurize.hpp"
#include "cts/random.hpp"

namespace cts::bias {

nlohmann::json AuditEntry::to_json() const {
  return {{"batch", batch + 1}, {"record_id", record_id}, {"operation", operation},
          {"field", field},     {"before", before},       {"after", after}};
}

Lexicon parse_lexicon(std::string_view text) {
  Lexicon lexicon;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string term, replacement, extra;
    if (!(fields >> term)) continue;
    if (!(fields >> replacement) || (fields >> extra)) {
      throw DataError("lexicon line " + std::to_string(line_number) +
                      ": expected two columns (term, replacement)");
    }
    lexicon.push_back({std::move(term), std::move(replacement)});
  }
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read lexicon '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

const Lexicon& default_lexicon() {
  static const Lexicon lexicon = parse_lexicon(default_lexicon_text());
  return lexicon;
}

namespace {

bool record_order(const Record& a, const Record& b) {
  if (a.date != b.date) return a.date < b.date;
  return a.id < b.id;
}

}  // namespace

Injected inject_subject_skew(std::span<const Record> batch, std::string_view subject,
                             double factor, std::uint64_t seed) {
  if (!(factor >= 1.0)) throw std::invalid_argument("subject skew factor must be >= 1");
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].subject == subject) matches.push_back(i);
  }
  if (matches.empty()) {
    throw std::invalid_argument("subject '" + std::string(subject) + "' not present in batch");
  }
  const double n = static_cast<double>(batch.size());
  const double s = static_cast<double>(matches.size());
  const double target = std::min(1.0, factor * s / n);

  std::size_t duplicates = 0;
  if (matches.size() < batch.size() && target > s / n) {
    if (target >= 1.0) {
      throw std::invalid_argument("subject share of 1.0 is unreachable by duplication");
    }
    // (s + d) / (n + d) = target, rounded up so the share reaches the target.
    duplicates = static_cast<std::size_t>(std::ceil((target * n - s) / (1.0 - target) - 1e-9));
  }

  Injected out;
  out.records.assign(batch.begin(), batch.end());
  Rng rng(seed);
  rng.shuffle(std::span(matches));
  for (std::size_t d = 0; d < duplicates; ++d) {
    Record copy = batch[matches[d % matches.size()]];
    const std::string source_id = copy.id;
    copy.id += "~dup" + std::to_string(d + 1);
    out.audit.push_back({0, copy.id, "subject_skew", "record", "", "duplicate of " + source_id});
    out.records.push_back(std::move(copy));
  }
  std::stable_sort(out.records.begin(), out.records.end(), record_order);
  return out;
}

Injected inject_framing(std::span<const Record> batch, const Lexicon& lexicon, double rate,
                        std::uint64_t seed) {
  if (lexicon.empty()) throw std::invalid_argument("framing lexicon is empty");
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("framing rate must lie in [0,1]");
  std::map<std::string, std::string, std::less<>> swaps;
  for (const auto& e : lexicon) swaps.emplace(e.term, e.replacement);

  Injected out;
  out.records.assign(batch.begin(), batch.end());
  Rng rng(seed);
  for (auto& r : out.records) {
    std::string rebuilt;
    bool changed = false;
    for (auto token : tokenize(r.title)) {
      if (!rebuilt.empty()) rebuilt.push_back(' ');
      auto it = swaps.find(token);
      if (it != swaps.end() && rng.bernoulli(rate)) {
        rebuilt += it->second;
        changed = true;
      } else {
        rebuilt += token;
      }
    }
    if (changed) {
      out.audit.push_back({0, r.id, "framing", "title", r.title, rebuilt});
      r.title = std::move(rebuilt);
    }
  }
  return out;
}

Injected inject_label_drift(std::span<const Record> batch, double target_pos_rate,
                            std::uint64_t seed) {
  if (!(target_pos_rate >= 0.0 && target_pos_rate <= 1.0)) {
    throw std::invalid_argument("target positive rate must lie in [0,1]");
  }
  if (batch.empty()) throw std::invalid_argument("label drift needs a non-empty batch");
  Injected out;
  out.records.assign(batch.begin(), batch.end());
  std::vector<std::size_t> positives, negatives;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    (out.records[i].label == 1 ? positives : negatives).push_back(i);
  }
  const auto target = static_cast<std::size_t>(
      std::llround(target_pos_rate * static_cast<double>(out.records.size())));
  auto& pool = target > positives.size() ? negatives : positives;
  const std::size_t flips = target > positives.size() ? target - positives.size()
                                                      : positives.size() - target;
  Rng rng(seed);
  rng.shuffle(std::span(pool));
  for (std::size_t f = 0; f < flips; ++f) {
    Record& r = out.records[pool[f]];
    const int before = r.label;
    r.label = 1 - r.label;
    out.audit.push_back({0, r.id, "label_drift", "label", std::to_string(before),
                         std::to_string(r.label)});
  }
  return out;
}

CounterfactualPair make_counterfactual(const Record& record) {
  if (record.protected_group != 0 && record.protected_group != 1) {
    throw std::invalid_argument("protected attribute of '" + record.id + "' is not binary");
  }
  CounterfactualPair pair{record, record};
  pair.flipped.protected_group = 1 - record.protected_group;
  return pair;
}

void InjectionPlan::validate(std::size_t k, std::size_t clean_prefix) const {
  for (auto b : target_batches) {
    if (b < clean_prefix) {
      throw ConfigError("injection target batch " + std::to_string(b + 1) +
                        " lies inside the clean prefix");
    }
    if (b >= k) {
      throw ConfigError("injection target batch " + std::to_string(b + 1) + " exceeds k=" +
                        std::to_string(k));
    }
  }
  if (subject_skew) {
    if (subject_skew->subject.empty()) throw ConfigError("subject skew needs a subject");
    if (!(subject_skew->factor >= 1.0)) throw ConfigError("subject skew factor must be >= 1");
  }
  if (framing) {
    if (framing->lexicon.empty()) throw ConfigError("framing lexicon is empty");
    if (!(framing->rate >= 0.0 && framing->rate <= 1.0)) {
      throw ConfigError("framing rate must lie in [0,1]");
    }
  }
  for (double r : label_drift) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("label drift rates must lie in [0,1]");
  }
  if (label_drift.size() > 1 && label_drift.size() != target_batches.size()) {
    throw ConfigError("label drift schedule needs one rate or one per target batch");
  }
}

InjectionPlan InjectionPlan::standard(std::size_t k, std::size_t clean_prefix) {
  InjectionPlan plan;
  for (std::size_t b = clean_prefix; b < k; ++b) plan.target_batches.push_back(b);
  plan.subject_skew = SubjectSkew{"politics", 2.0};
  plan.framing = Framing{default_lexicon(), 0.5};
  plan.label_drift = {0.8};
  return plan;
}

InjectionRun apply_plan(const BatchSeries& clean, const InjectionPlan& plan, std::uint64_t seed) {
  plan.validate(clean.k(), clean.clean_prefix);
  InjectionRun run{clean, {}};
  for (std::size_t t = 0; t < plan.target_batches.size(); ++t) {
    const std::size_t b = plan.target_batches[t];
    auto& batch = run.series.batches[b];
    auto absorb = [&](Injected injected) {
      batch = std::move(injected.records);
      for (auto& e : injected.audit) {
        e.batch = b;
        run.audit.push_back(std::move(e));
      }
    };
    if (plan.subject_skew) {
      absorb(inject_subject_skew(batch, plan.subject_skew->subject, plan.subject_skew->factor,
                                 derive_seed(seed, "subject_skew", b)));
    }
    if (plan.framing) {
      absorb(inject_framing(batch, plan.framing->lexicon, plan.framing->rate,
                            derive_seed(seed, "framing", b)));
    }
    if (!plan.label_drift.empty()) {
      const double rate = plan.label_drift.size() == 1 ? plan.label_drift[0] : plan.label_drift[t];
      absorb(inject_label_drift(batch, rate, derive_seed(seed, "label_drift", b)));
    }
  }
  return run;
}

}  // namespace cts::bias
