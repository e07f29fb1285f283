#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cts/record.hpp"

namespace cts::bias {

/// One mutation made by an injector.
struct AuditEntry {
  std::size_t batch = 0;
  std::string record_id;
  std::string operation;  // subject_skew | framing | label_drift
  std::string field;
  std::string before;
  std::string after;

  nlohmann::json to_json() const;
};
using AuditLog = std::vector<AuditEntry>;

/// Records produced by an injector together with what it changed. Audit
/// entries carry batch index 0; apply_plan() stamps the real index.
struct Injected {
  std::vector<Record> records;
  AuditLog audit;
};

struct LexiconEntry {
  std::string term;
  std::string replacement;
  bool operator==(const LexiconEntry&) const = default;
};
using Lexicon = std::vector<LexiconEntry>;

/// Two whitespace-separated columns per line; '#' starts a comment.
Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);
std::string_view default_lexicon_text();
const Lexicon& default_lexicon();

/// Duplicates records of `subject` (fresh ids, chosen round-robin from a
/// seeded shuffle) until the subject's share reaches min(1, factor * share).
/// Throws std::invalid_argument for factor < 1, a subject absent from the
/// batch, or a target share of 1 that duplication cannot reach.
Injected inject_subject_skew(std::span<const Record> batch, std::string_view subject,
                             double factor, std::uint64_t seed);

/// Replaces each occurrence of a lexicon term in a title by its paired term
/// with probability `rate`, independently per occurrence.
Injected inject_framing(std::span<const Record> batch, const Lexicon& lexicon, double rate,
                        std::uint64_t seed);

/// Flips uniformly chosen labels (without replacement) until the positive
/// count equals round(target_pos_rate * n).
Injected inject_label_drift(std::span<const Record> batch, double target_pos_rate,
                            std::uint64_t seed);

struct CounterfactualPair {
  Record original;
  Record flipped;
};

/// Inverts the protected attribute and nothing else. Throws
/// std::invalid_argument for a non-binary attribute.
CounterfactualPair make_counterfactual(const Record& record);

struct SubjectSkew {
  std::string subject;
  double factor = 1.0;
};

struct Framing {
  Lexicon lexicon;
  double rate = 0.0;
};

/// Which batches to perturb and how. Injectors run in the order subject skew,
/// framing, label drift within each target batch.
struct InjectionPlan {
  std::vector<std::size_t> target_batches;  // 0-based
  std::optional<SubjectSkew> subject_skew;
  std::optional<Framing> framing;
  /// Target positive rate per target batch; a single value applies to all.
  std::vector<double> label_drift;

  /// Throws ConfigError when a target lies in the clean prefix or beyond k,
  /// or a factor/rate is out of range.
  void validate(std::size_t k, std::size_t clean_prefix) const;

  /// Every batch from clean_prefix on: "politics" x2, framing rate 0.5 with
  /// the default lexicon, positive rate driven to 0.8.
  static InjectionPlan standard(std::size_t k, std::size_t clean_prefix);
};

struct InjectionRun {
  BatchSeries series;
  AuditLog audit;
};

/// Applies the plan to a copy of the series; the input is left untouched.
InjectionRun apply_plan(const BatchSeries& clean, const InjectionPlan& plan, std::uint64_t seed);

}  // namespace cts::bias
