// cts: batch trust monitoring for a fake-news reward classifier.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cts/config.hpp"
#include "cts/error.hpp"
#include "cts/pipeline.hpp"
#include "cts/report.hpp"
#include "cts/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code(const cts::Error& e) {
  switch (e.kind()) {
    case cts::Error::Kind::kConfig: return kExitConfig;
    case cts::Error::Kind::kData: return kExitData;
    case cts::Error::Kind::kNumeric: return kExitNumeric;
  }
  return kExitData;
}

int cmd_init(const fs::path& path, bool force, bool quiet) {
  if (fs::exists(path) && !force) {
    throw cts::ConfigError("'" + path.string() + "' exists; pass --force to overwrite");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cts::ConfigError("cannot write '" + path.string() + "'");
  out << cts::pipeline::config_template();
  if (!quiet) std::cerr << "wrote template config to " << path << "\n";
  return 0;
}

int cmd_synth(const cts::synth::SyntheticConfig& config, const fs::path& out, bool quiet) {
  cts::synth::generate(config, out);
  if (!quiet) std::cerr << "wrote " << config.n << " synthetic records to " << out << "\n";
  return 0;
}

int cmd_run(const fs::path& config_path, std::optional<std::uint64_t> seed,
            const std::string& out, bool quiet) {
  auto config = cts::pipeline::load_config(config_path);
  if (seed) config.seed = *seed;
  if (!out.empty()) config.output_dir = out;
  cts::pipeline::Progress progress;
  if (!quiet) progress = [](std::string_view msg) { std::cerr << "[cts] " << msg << "\n"; };
  const auto result = cts::pipeline::run(config, progress);
  if (!quiet) {
    for (const auto& row : result.report.batches) {
      std::cerr << "  batch " << row.batch + 1 << (row.injected ? "*" : " ")
                << "  acc " << row.accuracy << "  D " << row.components.drift << "  T "
                << row.trust << "  T~ " << row.smoothed << "\n";
    }
    std::cerr << "  alerts:";
    for (auto b : result.report.alerts) std::cerr << ' ' << b + 1;
    std::cerr << (result.report.alerts.empty() ? " none\n" : "\n");
  }
  return 0;
}

int cmd_report(const fs::path& dir, bool quiet) {
  const auto report = cts::report::RunReport::load(dir / "report.json");
  cts::report::write_plots(report, dir / "plots");
  cts::report::write_trust_csv(report, dir / "trust_timeline.csv");
  cts::report::write_drift_csv(report, dir / "drift_report.csv");
  if (!quiet) std::cerr << "re-emitted plot data under " << (dir / "plots") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual trust monitoring for batch news classification"};
  app.set_version_flag("--version", std::string(CTS_VERSION));
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "Suppress progress output")->configurable(false);

  fs::path config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool force = false;

  auto* init = app.add_subcommand("init", "Write a commented template config");
  init->add_option("--config,-c", config_path, "Where to write the template")->required();
  init->add_flag("--force", force, "Overwrite an existing file");

  cts::synth::SyntheticConfig synth_config;
  fs::path synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled news corpus");
  synth->add_option("--out,-o", synth_out, "CSV file to write")->required();
  synth->add_option("-n", synth_config.n, "Number of records")->capture_default_str();
  synth->add_option("-k", synth_config.k, "Batch count the corpus must support")->capture_default_str();
  synth->add_option("--seed", synth_config.seed, "Generator seed")->capture_default_str();
  synth->add_option("--filler-vocab", synth_config.filler_vocabulary, "Distinct neutral title words")
      ->capture_default_str();
  synth->add_option("--filler-words", synth_config.filler_words, "Neutral words per title")
      ->capture_default_str();
  synth->add_option("--sentiment-pairs", synth_config.sentiment_pairs,
                    "Lexicon pairs used for sentiment words")
      ->capture_default_str();
  synth->add_option("--sentiment-agreement", synth_config.sentiment_agreement,
                    "Chance a sentiment word matches the label")
      ->capture_default_str();

  auto* run = app.add_subcommand("run", "Run the full monitoring pipeline");
  run->add_option("--config,-c", config_path, "Run configuration")->required();
  run->add_option("--seed", seed, "Override run.seed");
  run->add_option("--out,-o", out, "Override run.out");

  auto* rep = app.add_subcommand("report", "Re-emit plot data from a stored report.json");
  rep->add_option("--out,-o", out, "Run output directory holding report.json")->required();

  for (auto* sub : {init, synth, run, rep}) sub->add_flag("--quiet,-q", quiet, "Suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*init) return cmd_init(config_path, force, quiet);
    if (*synth) return cmd_synth(synth_config, synth_out, quiet);
    if (*run) return cmd_run(config_path, seed, out, quiet);
    if (*rep) return cmd_report(out, quiet);
  } catch (const cts::Error& e) {
    std::cerr << "cts: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "cts: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
