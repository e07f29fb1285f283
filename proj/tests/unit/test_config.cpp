#include <fstream>

#include <gtest/gtest.h>

#include "cts/config.hpp"
#include "cts/error.hpp"
#include "test_support.hpp"

namespace cts::pipeline {
namespace {

struct ValidConfig {
  std::filesystem::path dir = testing::scratch_dir("config");
  RunConfig config;

  ValidConfig() {
    std::ofstream(dir / "data.csv") << "title,subject,source,date,label\n";
    config = parse_config("input.path = data.csv\n", dir);
  }
};

TEST(ParseConfig, KeyValueWithComments) {
  const auto c = parse_config(
      "# a comment\n"
      "input.path = in.csv   # trailing\n"
      "\n"
      "batches.k = 8\n"
      "batches.clean_prefix = 3\n"
      "trust.lambda = 0.25\n"
      "drift.weights = 1, 2, 3, 4\n"
      "run.seed = 123\n",
      "/base");
  EXPECT_EQ(c.input_path, std::filesystem::path("/base/in.csv"));
  EXPECT_EQ(c.k, 8u);
  EXPECT_EQ(c.clean_prefix, 3u);
  EXPECT_EQ(c.lambda, 0.25);
  EXPECT_EQ(c.drift_weights.values[3], 4.0);
  EXPECT_EQ(c.seed, 123u);
}

TEST(ParseConfig, InjectionWindowFollowsBatchCount) {
  const auto c = parse_config("batches.k = 8\nbatches.clean_prefix = 3\n", ".");
  EXPECT_EQ(c.inject_batches, (std::vector<std::size_t>{3, 4, 5, 6, 7}));
  const auto d = parse_config("batches.k = 8\ninject.batches = 7-8\n", ".");
  EXPECT_EQ(d.inject_batches, (std::vector<std::size_t>{6, 7}));
}

TEST(ParseConfig, DefaultsMatchStandardPlan) {
  const RunConfig c;
  EXPECT_EQ(c.k, 10u);
  EXPECT_EQ(c.clean_prefix, 5u);
  EXPECT_EQ(c.inject_batches, (std::vector<std::size_t>{5, 6, 7, 8, 9}));
  EXPECT_EQ(c.skew_subject, "politics");
  EXPECT_EQ(c.skew_factor, 2.0);
  EXPECT_EQ(c.framing_rate, 0.5);
  EXPECT_EQ(c.label_drift, (std::vector<double>{0.8}));
  EXPECT_EQ(c.tae.variant, drift::AutoencoderVariant::kAttention);
  EXPECT_EQ(c.tae.eta, 0.1);
  EXPECT_EQ(c.ae.eta, 0.0);
}

TEST(ParseConfig, RejectsUnknownDuplicateAndMalformed) {
  EXPECT_THROW(parse_config("no.such.key = 1\n", "."), ConfigError);
  EXPECT_THROW(parse_config("batches.k = 3\nbatches.k = 4\n", "."), ConfigError);
  EXPECT_THROW(parse_config("batches.k\n", "."), ConfigError);
  EXPECT_THROW(parse_config("batches.k = ten\n", "."), ConfigError);
  EXPECT_THROW(parse_config("batches.k = -1\n", "."), ConfigError);
  EXPECT_THROW(parse_config("trust.lambda = 0.5x\n", "."), ConfigError);
  EXPECT_THROW(parse_config("inject.enabled = maybe\n", "."), ConfigError);
  EXPECT_THROW(parse_config("drift.weights = 1,2\n", "."), ConfigError);
  EXPECT_THROW(parse_config("input.format = xml\n", "."), ConfigError);
  EXPECT_THROW(parse_config("ae.variant = deep\n", "."), ConfigError);
}

TEST(ParseBatchList, RangesAndLists) {
  EXPECT_EQ(parse_batch_list("6-10"), (std::vector<std::size_t>{5, 6, 7, 8, 9}));
  EXPECT_EQ(parse_batch_list("6,7,9"), (std::vector<std::size_t>{5, 6, 8}));
  EXPECT_EQ(parse_batch_list("6-8, 10"), (std::vector<std::size_t>{5, 6, 7, 9}));
  EXPECT_TRUE(parse_batch_list("").empty());
  EXPECT_THROW(parse_batch_list("0"), ConfigError);
  EXPECT_THROW(parse_batch_list("5-3"), ConfigError);
}

TEST(Template, ParsesToTheBuiltInDefaults) {
  const auto c = parse_config(config_template(), "/base");
  const RunConfig d;
  EXPECT_EQ(c.input_path, std::filesystem::path("/base/synthetic.csv"));
  EXPECT_EQ(c.k, d.k);
  EXPECT_EQ(c.clean_prefix, d.clean_prefix);
  EXPECT_EQ(c.inject_enabled, d.inject_enabled);
  EXPECT_EQ(c.inject_batches, d.inject_batches);
  EXPECT_EQ(c.skew_subject, d.skew_subject);
  EXPECT_EQ(c.skew_factor, d.skew_factor);
  EXPECT_EQ(c.framing_rate, d.framing_rate);
  EXPECT_EQ(c.label_drift, d.label_drift);
  EXPECT_EQ(c.features.dim, d.features.dim);
  EXPECT_EQ(c.features.hash_seed, d.features.hash_seed);
  EXPECT_EQ(c.model.n_trees, d.model.n_trees);
  EXPECT_EQ(c.model.depth, d.model.depth);
  EXPECT_EQ(c.model.learning_rate, d.model.learning_rate);
  EXPECT_EQ(c.model.early_stop_patience, d.model.early_stop_patience);
  EXPECT_EQ(c.model.train_fraction, d.model.train_fraction);
  EXPECT_EQ(c.model.l2, d.model.l2);
  EXPECT_EQ(c.model.min_child_hessian, d.model.min_child_hessian);
  EXPECT_EQ(c.model.validation_repeats, d.model.validation_repeats);
  for (auto [got, want] : {std::pair{&c.ae, &d.ae}, std::pair{&c.tae, &d.tae}}) {
    EXPECT_EQ(got->variant, want->variant);
    EXPECT_EQ(got->bottleneck_dim, want->bottleneck_dim);
    EXPECT_EQ(got->noise_sigma, want->noise_sigma);
    EXPECT_EQ(got->dropout, want->dropout);
    EXPECT_EQ(got->epochs, want->epochs);
    EXPECT_EQ(got->step_size, want->step_size);
    EXPECT_EQ(got->batch_size, want->batch_size);
    EXPECT_EQ(got->eta, want->eta);
    EXPECT_EQ(got->chunk, want->chunk);
  }
  EXPECT_EQ(c.drift_weights.values, d.drift_weights.values);
  EXPECT_EQ(c.trust_weights.alpha, d.trust_weights.alpha);
  EXPECT_EQ(c.trust_weights.zeta, d.trust_weights.zeta);
  EXPECT_EQ(c.lambda, d.lambda);
  EXPECT_EQ(c.alert_threshold, d.alert_threshold);
  EXPECT_EQ(c.importance_repeats, d.importance_repeats);
  EXPECT_EQ(c.seed, d.seed);
}

TEST(Validate, AcceptsMinimalConfig) {
  ValidConfig v;
  EXPECT_NO_THROW(v.config.validate());
}

TEST(Validate, MissingInputFile) {
  RunConfig c = parse_config("input.path = nowhere.csv\n", testing::scratch_dir("config-missing"));
  EXPECT_THROW(c.validate(), ConfigError);
  RunConfig empty;
  EXPECT_THROW(empty.validate(), ConfigError);
}

TEST(Validate, EveryRangeIsChecked) {
  const std::vector<std::function<void(RunConfig&)>> breakers{
      [](RunConfig& c) { c.k = 1; },
      [](RunConfig& c) { c.clean_prefix = 0; },
      [](RunConfig& c) { c.clean_prefix = 11; },
      [](RunConfig& c) { c.inject_batches = {2}; },
      [](RunConfig& c) { c.inject_batches = {10}; },
      [](RunConfig& c) { c.skew_factor = 0.5; },
      [](RunConfig& c) { c.framing_rate = 1.5; },
      [](RunConfig& c) { c.lexicon_path = "/no/such/lexicon.txt"; },
      [](RunConfig& c) { c.label_drift = {1.2}; },
      [](RunConfig& c) { c.label_drift = {0.5, 0.6}; },
      [](RunConfig& c) { c.features.dim = 4; },
      [](RunConfig& c) { c.model.n_trees = 0; },
      [](RunConfig& c) { c.model.depth = 0; },
      [](RunConfig& c) { c.model.learning_rate = 0.0; },
      [](RunConfig& c) { c.model.train_fraction = 1.0; },
      [](RunConfig& c) { c.model.l2 = -1.0; },
      [](RunConfig& c) { c.model.min_child_hessian = -1.0; },
      [](RunConfig& c) { c.model.validation_repeats = 0; },
      [](RunConfig& c) { c.ae.bottleneck_dim = 256; },
      [](RunConfig& c) { c.ae.dropout = 1.0; },
      [](RunConfig& c) { c.ae.epochs = 0; },
      [](RunConfig& c) { c.tae.step_size = 0.0; },
      [](RunConfig& c) { c.tae.eta = -0.1; },
      [](RunConfig& c) { c.tae.chunk = 0; },
      [](RunConfig& c) { c.drift_weights.values = {0, 0, 0, 0}; },
      [](RunConfig& c) { c.trust_weights.alpha = 0.5; },
      [](RunConfig& c) { c.lambda = 0.0; },
      [](RunConfig& c) { c.alert_threshold = 2.0; },
      [](RunConfig& c) { c.importance_repeats = 0; },
      [](RunConfig& c) { c.schema.label.clear(); },
  };
  ValidConfig v;
  for (std::size_t i = 0; i < breakers.size(); ++i) {
    RunConfig c = v.config;
    breakers[i](c);
    EXPECT_THROW(c.validate(), ConfigError) << "breaker " << i;
  }
}

TEST(Validate, InjectionRangesIgnoredWhenDisabled) {
  ValidConfig v;
  v.config.inject_enabled = false;
  v.config.inject_batches = {0};
  EXPECT_NO_THROW(v.config.validate());
}

TEST(LoadConfig, ResolvesAgainstFileDirectoryAndKeepsBytes) {
  const auto dir = testing::scratch_dir("config-load");
  const std::string text = "input.path = sub/data.csv\nrun.out = out\n";
  std::ofstream(dir / "run.cfg") << text;
  const auto c = load_config(dir / "run.cfg");
  EXPECT_EQ(c.input_path, dir / "sub/data.csv");
  EXPECT_EQ(c.output_dir, dir / "out");
  EXPECT_EQ(c.source_text, text);
  EXPECT_THROW(load_config(dir / "missing.cfg"), ConfigError);
}

}  // namespace
}  // namespace cts::pipeline
