#include "cts/report.hpp"

#include <cmath>
#include <fstream>

#include "cts/csv.hpp"
#include "cts/error.hpp"

namespace cts::report {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::string num(double v) { return csv::format_double(v); }

json batch_to_json(const BatchRow& row) {
  return {{"batch", row.batch + 1},
          {"records", row.records},
          {"injected", row.injected},
          {"accuracy", row.accuracy},
          {"psi", row.metrics.psi},
          {"jsd", row.metrics.jsd},
          {"ae_delta", row.metrics.ae_delta},
          {"tae_loss", row.metrics.tae_loss},
          {"D", row.components.drift},
          {"u_bar", row.components.uncertainty},
          {"R", row.components.violation},
          {"E", row.components.error},
          {"C", row.components.consistency},
          {"T", row.trust},
          {"T_smoothed", row.smoothed}};
}

BatchRow batch_from_json(const json& j) {
  BatchRow row;
  const auto batch = j.at("batch").get<std::size_t>();
  if (batch == 0) throw DataError("report batch numbers start at 1");
  row.batch = batch - 1;
  row.records = j.at("records").get<std::size_t>();
  row.injected = j.at("injected").get<bool>();
  row.accuracy = j.at("accuracy").get<double>();
  row.metrics.psi = j.at("psi").get<double>();
  row.metrics.jsd = j.at("jsd").get<double>();
  row.metrics.ae_delta = j.at("ae_delta").get<double>();
  row.metrics.tae_loss = j.at("tae_loss").get<double>();
  row.components.drift = j.at("D").get<double>();
  row.components.uncertainty = j.at("u_bar").get<double>();
  row.components.violation = j.at("R").get<double>();
  row.components.error = j.at("E").get<double>();
  row.components.consistency = j.at("C").get<double>();
  row.trust = j.at("T").get<double>();
  row.smoothed = j.at("T_smoothed").get<double>();
  return row;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& v) {
  std::vector<std::size_t> out;
  for (auto b : v) out.push_back(b + 1);
  return out;
}

std::vector<std::size_t> zero_based(const json& j) {
  std::vector<std::size_t> out;
  for (const auto& b : j) {
    const auto v = b.get<std::size_t>();
    if (v == 0) throw DataError("report batch numbers start at 1");
    out.push_back(v - 1);
  }
  return out;
}

}  // namespace

json RunReport::to_json() const {
  json audit = json::object();
  for (const auto& [batch, ops] : audit_counts) {
    json counts = json::object();
    for (const auto& [op, n] : ops) counts[op] = n;
    audit[std::to_string(batch + 1)] = counts;
  }
  json importance_rows = json::array();
  for (const auto& fi : importance) {
    importance_rows.push_back({{"group", fi.group}, {"importance", fi.importance}});
  }
  json rows = json::array();
  for (const auto& row : batches) rows.push_back(batch_to_json(row));

  return {
      {"format", "cts-run-report"},
      {"version", kReportFormatVersion},
      {"tool_version", tool_version},
      {"seed", seed},
      {"data",
       {{"provenance", provenance},
        {"input", input_name},
        {"loaded", loaded},
        {"dropped_on_load", dropped_on_load},
        {"dropped_on_clean", dropped_on_clean},
        {"k", k},
        {"clean_prefix", clean_prefix}}},
      {"injection", {{"batches", one_based(injected_batches)}, {"audit_counts", audit}}},
      {"model",
       {{"trees", model.trees},
        {"train_rows", model.train_rows},
        {"validation_rows", model.validation_rows},
        {"temperature", model.temperature},
        {"validation_accuracy", model.validation_accuracy},
        {"repeat_validation_accuracy", model.repeat_validation_accuracy},
        {"schema_hash", model.schema_hash}}},
      {"drift",
       {{"metrics", {"psi", "jsd", "ae_delta", "tae_loss"}},
        {"lower", drift.lower},
        {"upper", drift.upper},
        {"ae_reference_error", drift.ae_reference_error},
        {"ae_final_training_loss", drift.ae_final_training_loss},
        {"tae_final_training_loss", drift.tae_final_training_loss}}},
      {"trust",
       {{"weights",
         {{"alpha", trust_weights.alpha},
          {"beta", trust_weights.beta},
          {"gamma", trust_weights.gamma},
          {"delta", trust_weights.delta},
          {"zeta", trust_weights.zeta}}},
        {"lambda", lambda},
        {"alert_threshold", alert_threshold},
        {"alerts", one_based(alerts)}}},
      {"batches", rows},
      {"feature_importance",
       {{"method", "permutation"}, {"repeats", importance_repeats}, {"groups", importance_rows}}},
      {"config", config_text},
  };
}

RunReport RunReport::from_json(const json& j) {
  try {
    if (j.at("format") != "cts-run-report") throw DataError("not a cts run report");
    if (j.at("version").get<int>() != kReportFormatVersion) {
      throw DataError("unsupported report version " + j.at("version").dump());
    }
    RunReport r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& data = j.at("data");
    r.provenance = data.at("provenance").get<std::string>();
    r.input_name = data.at("input").get<std::string>();
    r.loaded = data.at("loaded").get<std::size_t>();
    r.dropped_on_load = data.at("dropped_on_load").get<std::size_t>();
    r.dropped_on_clean = data.at("dropped_on_clean").get<std::size_t>();
    r.k = data.at("k").get<std::size_t>();
    r.clean_prefix = data.at("clean_prefix").get<std::size_t>();
    const auto& inj = j.at("injection");
    r.injected_batches = zero_based(inj.at("batches"));
    for (const auto& [batch, ops] : inj.at("audit_counts").items()) {
      const auto b = std::stoul(batch);
      if (b == 0) throw DataError("report batch numbers start at 1");
      for (const auto& [op, n] : ops.items()) r.audit_counts[b - 1][op] = n.get<std::size_t>();
    }
    const auto& m = j.at("model");
    r.model.trees = m.at("trees").get<std::size_t>();
    r.model.train_rows = m.at("train_rows").get<std::size_t>();
    r.model.validation_rows = m.at("validation_rows").get<std::size_t>();
    r.model.temperature = m.at("temperature").get<double>();
    r.model.validation_accuracy = m.at("validation_accuracy").get<double>();
    r.model.repeat_validation_accuracy = m.at("repeat_validation_accuracy").get<std::vector<double>>();
    r.model.schema_hash = m.at("schema_hash").get<std::string>();
    const auto& d = j.at("drift");
    r.drift.lower = d.at("lower").get<std::array<double, 4>>();
    r.drift.upper = d.at("upper").get<std::array<double, 4>>();
    r.drift.ae_reference_error = d.at("ae_reference_error").get<double>();
    r.drift.ae_final_training_loss = d.at("ae_final_training_loss").get<double>();
    r.drift.tae_final_training_loss = d.at("tae_final_training_loss").get<double>();
    const auto& t = j.at("trust");
    const auto& w = t.at("weights");
    r.trust_weights.alpha = w.at("alpha").get<double>();
    r.trust_weights.beta = w.at("beta").get<double>();
    r.trust_weights.gamma = w.at("gamma").get<double>();
    r.trust_weights.delta = w.at("delta").get<double>();
    r.trust_weights.zeta = w.at("zeta").get<double>();
    r.lambda = t.at("lambda").get<double>();
    r.alert_threshold = t.at("alert_threshold").get<double>();
    r.alerts = zero_based(t.at("alerts"));
    for (const auto& row : j.at("batches")) r.batches.push_back(batch_from_json(row));
    const auto& fi = j.at("feature_importance");
    r.importance_repeats = fi.at("repeats").get<std::size_t>();
    for (const auto& g : fi.at("groups")) {
      r.importance.push_back({g.at("group").get<std::string>(), g.at("importance").get<double>()});
    }
    r.config_text = j.at("config").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed run report: ") + e.what());
  }
}

RunReport RunReport::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read report '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("report '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

const std::vector<std::string>& correlation_metrics() {
  static const std::vector<std::string> names{"psi", "jsd", "ae_delta", "u_bar",
                                              "R",   "C",   "E",        "T"};
  return names;
}

std::vector<std::vector<double>> metric_correlation(const RunReport& report) {
  std::vector<std::vector<double>> series(correlation_metrics().size());
  for (const auto& row : report.batches) {
    const std::array<double, 8> values{row.metrics.psi,           row.metrics.jsd,
                                       row.metrics.ae_delta,      row.components.uncertainty,
                                       row.components.violation,  row.components.consistency,
                                       row.components.error,      row.trust};
    for (std::size_t m = 0; m < values.size(); ++m) series[m].push_back(values[m]);
  }
  std::vector<std::vector<double>> corr(series.size(), std::vector<double>(series.size(), 0.0));
  for (std::size_t a = 0; a < series.size(); ++a) {
    corr[a][a] = 1.0;
    for (std::size_t b = a + 1; b < series.size(); ++b) {
      corr[a][b] = corr[b][a] = pearson(series[a], series[b]);
    }
  }
  return corr;
}

void write_trust_csv(const RunReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "batch,D,u_bar,R,E,C,T,T_smoothed,alert\n";
  for (const auto& row : report.batches) {
    const auto& c = row.components;
    out << row.batch + 1 << ',' << num(c.drift) << ',' << num(c.uncertainty) << ','
        << num(c.violation) << ',' << num(c.error) << ',' << num(c.consistency) << ','
        << num(row.trust) << ',' << num(row.smoothed) << ','
        << (row.smoothed < report.alert_threshold ? 1 : 0) << "\n";
  }
}

void write_drift_csv(const RunReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "batch,records,injected,psi,jsd,ae_delta,tae_loss,D\n";
  for (const auto& row : report.batches) {
    out << row.batch + 1 << ',' << row.records << ',' << (row.injected ? 1 : 0) << ','
        << num(row.metrics.psi) << ',' << num(row.metrics.jsd) << ',' << num(row.metrics.ae_delta)
        << ',' << num(row.metrics.tae_loss) << ',' << num(row.components.drift) << "\n";
  }
}

void write_plots(const RunReport& report, const std::filesystem::path& dir) {
  {
    auto out = open_out(dir / "drift_vs_error.csv");
    out << "batch,D,E,accuracy,injected\n";
    for (const auto& row : report.batches) {
      out << row.batch + 1 << ',' << num(row.components.drift) << ',' << num(row.components.error)
          << ',' << num(row.accuracy) << ',' << (row.injected ? 1 : 0) << "\n";
    }
  }
  {
    auto out = open_out(dir / "trust_by_batch.csv");
    out << "batch,T,T_smoothed,threshold,injected\n";
    for (const auto& row : report.batches) {
      out << row.batch + 1 << ',' << num(row.trust) << ',' << num(row.smoothed) << ','
          << num(report.alert_threshold) << ',' << (row.injected ? 1 : 0) << "\n";
    }
  }
  {
    auto out = open_out(dir / "feature_importance.csv");
    out << "rank,group,importance\n";
    for (std::size_t i = 0; i < report.importance.size(); ++i) {
      out << i + 1 << ',' << csv::escape(report.importance[i].group) << ','
          << num(report.importance[i].importance) << "\n";
    }
  }
  {
    const auto& names = correlation_metrics();
    const auto corr = metric_correlation(report);
    auto out = open_out(dir / "metric_correlation.csv");
    out << "metric";
    for (const auto& n : names) out << ',' << n;
    out << "\n";
    for (std::size_t a = 0; a < names.size(); ++a) {
      out << names[a];
      for (double v : corr[a]) out << ',' << num(v);
      out << "\n";
    }
  }
}

void write_all(const RunReport& report, const std::filesystem::path& dir) {
  const auto j = report.to_json();
  write_text(dir / "report.json", j.dump(2) + "\n");
  write_trust_csv(report, dir / "trust_timeline.csv");
  write_drift_csv(report, dir / "drift_report.csv");
  write_text(dir / "trust_timeline.json",
             json{{"lambda", report.lambda},
                  {"alert_threshold", report.alert_threshold},
                  {"alerts", j.at("trust").at("alerts")},
                  {"batches", [&] {
                     json rows = json::array();
                     for (const auto& row : j.at("batches")) {
                       rows.push_back({{"batch", row.at("batch")}, {"D", row.at("D")},
                                       {"u_bar", row.at("u_bar")}, {"R", row.at("R")},
                                       {"E", row.at("E")}, {"C", row.at("C")},
                                       {"T", row.at("T")}, {"T_smoothed", row.at("T_smoothed")}});
                     }
                     return rows;
                   }()}}
                 .dump(2) + "\n");
  write_text(dir / "drift_report.json",
             json{{"metrics", j.at("drift")}, {"batches", [&] {
                    json rows = json::array();
                    for (const auto& row : j.at("batches")) {
                      rows.push_back({{"batch", row.at("batch")}, {"records", row.at("records")},
                                      {"injected", row.at("injected")}, {"psi", row.at("psi")},
                                      {"jsd", row.at("jsd")}, {"ae_delta", row.at("ae_delta")},
                                      {"tae_loss", row.at("tae_loss")}, {"D", row.at("D")}});
                    }
                    return rows;
                  }()}}
                 .dump(2) + "\n");
  write_plots(report, dir / "plots");
}

}  // namespace cts::report
