#include "cts/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>

#include "cts/autoencoder.hpp"
#include "cts/drift.hpp"
#include "cts/featurize.hpp"
#include "cts/ingest.hpp"
#include "cts/matrix.hpp"
#include "cts/random.hpp"
#include "cts/synthetic.hpp"
#include "cts/trust.hpp"

namespace cts::pipeline {

namespace {

namespace fs = std::filesystem;

class StageRunner {
 public:
  explicit StageRunner(const Progress& progress) : progress_(progress) {}

  template <typename F>
  auto operator()(const std::string& stage, F&& body) {
    if (progress_) progress_("stage " + stage);
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(body())>) {
        body();
        record(stage, start);
      } else {
        auto out = body();
        record(stage, start);
        return out;
      }
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(stage, e.kind(), e.what());
    } catch (const std::exception& e) {
      throw StageError(stage, Error::Kind::kData, e.what());
    }
  }

  std::vector<StageTiming> timings;

 private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    timings.push_back({stage, elapsed.count()});
  }

  const Progress& progress_;
};

struct BatchFeatures {
  Matrix x;
  Matrix counterfactual;
  std::vector<int> labels;
};

std::vector<int> labels_of(std::span<const Record> records) {
  std::vector<int> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(r.label);
  return y;
}

Matrix vstack(std::span<const BatchFeatures> parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.x.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().x.cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.x.rows()) = p.x;
    at += p.x.rows();
  }
  return out;
}

bias::InjectionPlan plan_from(const RunConfig& config) {
  bias::InjectionPlan plan;
  if (!config.inject_enabled) return plan;
  plan.target_batches = config.inject_batches;
  if (!config.skew_subject.empty()) plan.subject_skew = bias::SubjectSkew{config.skew_subject, config.skew_factor};
  if (config.framing_rate > 0.0) {
    plan.framing = bias::Framing{config.lexicon_path.empty() ? bias::default_lexicon()
                                                             : bias::load_lexicon(config.lexicon_path),
                                 config.framing_rate};
  }
  plan.label_drift = config.label_drift;
  return plan;
}

void write_jsonl(const fs::path& path, const bias::AuditLog& audit) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& entry : audit) out << entry.to_json().dump() << "\n";
}

void check_unit(double v, const char* name, std::size_t batch) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
    throw NumericError(std::string(name) + " of batch " + std::to_string(batch + 1) +
                       " left [0, 1]: " + std::to_string(v));
  }
}

}  // namespace

PipelineResult execute(const RunConfig& config, const Progress& progress, const fs::path& artifacts) {
  StageRunner stage(progress);
  PipelineResult result;
  auto& rep = result.report;
  rep.tool_version = CTS_VERSION;
  rep.config_text = config.source_text;
  rep.seed = config.seed;
  rep.input_name = config.input_path.filename().string();
  rep.k = config.k;
  rep.clean_prefix = config.clean_prefix;
  rep.trust_weights = config.trust_weights;
  rep.lambda = config.lambda;
  rep.alert_threshold = config.alert_threshold;
  rep.importance_repeats = config.importance_repeats;

  const BatchSeries clean = stage("ingest", [&] {
    rep.provenance = synth::is_synthetic(config.input_path) ? "synthetic" : "user-supplied";
    ingest::LoadOptions options{config.schema, config.input_format, derive_seed(config.seed, "ingest")};
    auto loaded = ingest::load_records(config.input_path, options);
    rep.loaded = loaded.size() + loaded.dropped_count;
    rep.dropped_on_load = loaded.dropped_count;
    const auto before = loaded.size();
    auto cleaned = ingest::clean_normalize(std::move(loaded));
    rep.dropped_on_clean = before - cleaned.size();
    if (config.dump_cleaned && !artifacts.empty()) {
      ingest::dump_records_jsonl(artifacts / "cleaned.jsonl", cleaned.records);
    }
    return ingest::partition_batches(cleaned, config.k, config.clean_prefix);
  });

  const BatchSeries series = stage("injection", [&] {
    const auto plan = plan_from(config);
    rep.injected_batches = plan.target_batches;
    auto run = bias::apply_plan(clean, plan, derive_seed(config.seed, "injection"));
    for (const auto& entry : run.audit) ++rep.audit_counts[entry.batch][entry.operation];
    if (!artifacts.empty()) write_jsonl(artifacts / "audit.jsonl", run.audit);
    result.audit = std::move(run.audit);
    return std::move(run.series);
  });

  std::vector<Record> clean_records;
  for (std::size_t b = 0; b < series.clean_prefix; ++b) {
    clean_records.insert(clean_records.end(), series.batches[b].begin(), series.batches[b].end());
  }
  const std::size_t train_rows = reward::train_rows_for(clean_records.size(), config.model.train_fraction);

  std::vector<BatchFeatures> batches;
  const Featurizer featurizer = stage("featurize", [&] {
    Date first{std::numeric_limits<std::int32_t>::max()};
    Date last{std::numeric_limits<std::int32_t>::min()};
    for (const auto& batch : series.batches) {
      for (const auto& r : batch) {
        first = std::min(first, r.date);
        last = std::max(last, r.date);
      }
    }
    auto fitted = Featurizer::fit(std::span(clean_records).first(train_rows), first, last, config.features);
    for (const auto& batch : series.batches) {
      std::vector<Record> flipped;
      flipped.reserve(batch.size());
      for (const auto& r : batch) flipped.push_back(bias::make_counterfactual(r).flipped);
      batches.push_back({to_matrix(fitted.transform(batch)), to_matrix(fitted.transform(flipped)),
                         labels_of(batch)});
    }
    return fitted;
  });
  const auto layout = featurizer.layout();

  const std::span<const BatchFeatures> clean_part(batches.data(), series.clean_prefix);
  const Matrix x_clean = vstack(clean_part);
  const std::vector<int> y_clean = labels_of(clean_records);

  result.model = stage("reward_model", [&] {
    auto model = reward::train(x_clean, y_clean, config.model);
    model.schema_hash = featurizer.schema_hash();
    model.feature_schema = featurizer.schema();
    const auto val_rows = x_clean.rows() - static_cast<Eigen::Index>(train_rows);
    const Matrix x_val = x_clean.bottomRows(val_rows);
    const std::span<const int> y_val(y_clean.data() + train_rows, static_cast<std::size_t>(val_rows));
    model = reward::calibrate_temperature(std::move(model), x_val, y_val);
    rep.model.trees = model.trees.size();
    rep.model.train_rows = model.trace.train_rows;
    rep.model.validation_rows = model.trace.validation_rows;
    rep.model.temperature = model.temperature;
    rep.model.validation_accuracy = reward::accuracy(model, x_val, y_val);
    rep.model.repeat_validation_accuracy = model.trace.repeat_validation_accuracy;
    rep.model.schema_hash = model.schema_hash;
    if (!artifacts.empty()) model.save(artifacts / "model.json");
    return model;
  });

  // Autoencoder inputs: the text block, the categorical codes scaled to
  // [0, 1] and the protected attribute. The date is the batching key and
  // would register as drift in every batch, so it is left out here and in
  // the histogram comparison.
  std::vector<drift::ScaledColumn> ae_columns;
  for (std::size_t c = 0; c < layout.text_dim; ++c) ae_columns.push_back({c, 1.0});
  ae_columns.push_back({layout.subject_column(), 1.0 / double(featurizer.subject_cardinality() - 1)});
  ae_columns.push_back({layout.source_column(), 1.0 / double(featurizer.source_cardinality() - 1)});
  ae_columns.push_back({layout.protected_column(), 1.0});

  struct DriftModels {
    drift::AutoencoderModel ae;
    drift::AutoencoderModel tae;
    drift::ReferenceDistribution reference;
    double ae_reference = 0.0;
  };
  const DriftModels models = stage("drift_models", [&] {
    // Same split as the reward model: the tail of the clean prefix stays unseen.
    const Matrix view =
        drift::select_columns(x_clean.topRows(static_cast<Eigen::Index>(train_rows)), ae_columns);
    auto tae_future = std::async(std::launch::async, [&] {
      return drift::train_autoencoder(view, config.tae, derive_seed(config.seed, "tae"));
    });
    auto ae = drift::train_autoencoder(view, config.ae, derive_seed(config.seed, "ae"));
    auto tae = tae_future.get();
    std::vector<drift::MonitoredColumn> monitored;
    for (std::size_t c = 0; c < layout.text_dim; ++c) monitored.push_back({c, false, 0});
    monitored.push_back({layout.subject_column(), true, int(featurizer.subject_cardinality() - 1)});
    monitored.push_back({layout.source_column(), true, int(featurizer.source_cardinality() - 1)});
    monitored.push_back({layout.protected_column(), true, 1});
    auto reference = drift::ReferenceDistribution::fit(x_clean, y_clean, monitored);
    const double ref = ae.mean_error(view);
    rep.drift.ae_reference_error = ref;
    rep.drift.ae_final_training_loss = ae.epoch_loss.empty() ? 0.0 : ae.epoch_loss.back();
    rep.drift.tae_final_training_loss = tae.epoch_loss.empty() ? 0.0 : tae.epoch_loss.back();
    return DriftModels{std::move(ae), std::move(tae), std::move(reference), ref};
  });

  stage("batch_metrics", [&] {
    const auto& model = result.model;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& bf = batches[b];
      report::BatchRow row;
      row.batch = b;
      row.records = static_cast<std::size_t>(bf.x.rows());
      row.injected = std::find(rep.injected_batches.begin(), rep.injected_batches.end(), b) !=
                     rep.injected_batches.end();
      row.accuracy = reward::accuracy(model, bf.x, bf.labels);
      const auto div = models.reference.compare(bf.x, bf.labels);
      const Matrix view = drift::select_columns(bf.x, ae_columns);
      row.metrics = {div.psi, div.jsd, drift::reconstruction_drift(models.ae, view, models.ae_reference),
                     models.tae.objective(view)};
      row.components.uncertainty = reward::batch_uncertainty(model, bf.x);
      row.components.violation = trust::fairness_violation_rate(model, bf.x, bf.counterfactual);
      row.components.error = 1.0 - row.accuracy;
      row.components.consistency = trust::counterfactual_consistency(model, bf.x, bf.counterfactual);
      rep.batches.push_back(row);
    }
  });

  stage("trust", [&] {
    std::vector<drift::DriftMetrics> clean_metrics;
    for (std::size_t b = 0; b < series.clean_prefix; ++b) clean_metrics.push_back(rep.batches[b].metrics);
    auto normalizer = drift::DriftNormalizer::fit(clean_metrics, config.drift_weights);
    for (auto& row : rep.batches) {
      normalizer.observe(row.metrics);
      row.components.drift = drift::drift_score(row.metrics, normalizer);
    }
    rep.drift.lower = normalizer.lower();
    rep.drift.upper = normalizer.upper();
    std::vector<trust::TrustComponents> components;
    for (const auto& row : rep.batches) components.push_back(row.components);
    const auto timeline = trust::build_timeline(components, config.trust_weights, config.lambda);
    for (std::size_t b = 0; b < rep.batches.size(); ++b) {
      auto& row = rep.batches[b];
      row.trust = timeline.rows[b].trust;
      row.smoothed = timeline.rows[b].smoothed;
      const auto& c = row.components;
      for (auto [v, name] : {std::pair{c.drift, "D"}, {c.uncertainty, "u_bar"}, {c.violation, "R"},
                             {c.error, "E"}, {c.consistency, "C"}, {row.trust, "T"},
                             {row.smoothed, "T_smoothed"}}) {
        check_unit(v, name, b);
      }
    }
    rep.alerts = timeline.alerts(config.alert_threshold);
  });

  stage("attribution", [&] {
    const Matrix x_all = vstack(batches);
    std::vector<int> y_all;
    for (const auto& bf : batches) y_all.insert(y_all.end(), bf.labels.begin(), bf.labels.end());
    const auto groups = layout.groups();
    rep.importance = trust::feature_importance(result.model, x_all, y_all, groups,
                                               derive_seed(config.seed, "attribution"),
                                               config.importance_repeats);
  });

  result.timings = std::move(stage.timings);
  return result;
}

namespace {

fs::path next_quarantine_slot(const fs::path& root) {
  for (unsigned n = 1;; ++n) {
    char name[32];
    std::snprintf(name, sizeof name, "run-%03u", n);
    if (!fs::exists(root / name)) return root / name;
  }
}

void write_meta(const fs::path& path, const PipelineResult& result) {
  nlohmann::json stages = nlohmann::json::array();
  double total = 0.0;
  for (const auto& t : result.timings) {
    stages.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    total += t.seconds;
  }
  const auto now = std::chrono::system_clock::now();
  const auto epoch_s = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  std::ofstream out(path, std::ios::binary);
  out << nlohmann::json{{"finished_unix", epoch_s}, {"total_seconds", total}, {"stages", stages}}.dump(2)
      << "\n";
}

}  // namespace

PipelineResult run(const RunConfig& config, const Progress& progress) {
  config.validate();
  const fs::path out = config.output_dir;
  const fs::path staging = out / ".staging";
  fs::create_directories(out);
  fs::remove_all(staging);
  fs::create_directories(staging);
  try {
    auto result = execute(config, progress, staging);
    report::write_all(result.report, staging);
    write_meta(staging / "run_meta.json", result);
    // Publish: replace files of any earlier successful run one by one.
    for (const auto& entry : fs::directory_iterator(staging)) {
      const auto target = out / entry.path().filename();
      fs::remove_all(target);
      fs::rename(entry.path(), target);
    }
    fs::remove_all(staging);
    if (progress) progress("outputs written to " + out.string());
    return result;
  } catch (const std::exception& e) {
    const fs::path slot = next_quarantine_slot(out / "quarantine");
    fs::create_directories(slot.parent_path());
    fs::rename(staging, slot);
    std::ofstream(slot / "error.txt") << e.what() << "\n";
    if (progress) progress("partial outputs quarantined in " + slot.string());
    throw;
  }
}

}  // namespace cts::pipeline
