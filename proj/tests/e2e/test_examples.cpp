// Full-size pipeline runs on the synthetic generator (n=5000, k=10).

#include <algorithm>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "cts/pipeline.hpp"
#include "cts/report.hpp"
#include "cts/synthetic.hpp"
#include "test_support.hpp"

namespace cts::pipeline {
namespace {

const std::vector<std::uint64_t> kSeeds{7, 11, 13, 17, 19};

class FullRuns : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { dir_ = new std::filesystem::path(testing::scratch_dir("e2e")); }
  static void TearDownTestSuite() { delete dir_; }

  static std::filesystem::path dataset(std::uint64_t seed) {
    const auto path = *dir_ / ("synthetic-" + std::to_string(seed) + ".csv");
    if (!std::filesystem::exists(path)) {
      synth::generate(synth::SyntheticConfig{.n = 5000, .k = 10, .seed = seed}, path);
    }
    return path;
  }

  static RunConfig config(std::uint64_t seed, const std::string& overrides = "") {
    auto c = parse_config(config_template(), *dir_);
    if (!overrides.empty()) {
      // Later keys cannot repeat earlier ones, so overrides replace whole lines.
      std::string text = config_template();
      std::istringstream lines(overrides);
      for (std::string line; std::getline(lines, line);) {
        const auto key = line.substr(0, line.find('='));
        const auto at = text.find("\n" + key);
        text.replace(at + 1, text.find('\n', at + 1) - at - 1, line);
      }
      c = parse_config(text, *dir_);
    }
    c.input_path = dataset(seed);
    c.seed = seed;
    return c;
  }

  // Injected runs are shared by several tests.
  static const report::RunReport& injected(std::uint64_t seed) {
    static std::map<std::uint64_t, report::RunReport> cache;
    auto it = cache.find(seed);
    if (it == cache.end()) it = cache.emplace(seed, execute(config(seed)).report).first;
    return it->second;
  }

  static std::filesystem::path* dir_;
};
std::filesystem::path* FullRuns::dir_ = nullptr;

TEST_F(FullRuns, CleanDataKeepsSmoothedTrustWithinTenth) {
  for (auto seed : kSeeds) {
    const auto rep = execute(config(seed, "inject.enabled = false")).report;
    double lo = 1.0, hi = 0.0;
    for (const auto& row : rep.batches) {
      lo = std::min(lo, row.smoothed);
      hi = std::max(hi, row.smoothed);
    }
    EXPECT_LE(hi - lo, 0.1) << "seed " << seed;
  }
}

TEST_F(FullRuns, InjectedBatchesHaveLowerSmoothedTrust) {
  for (auto seed : kSeeds) {
    const auto& rows = injected(seed).batches;
    ASSERT_EQ(rows.size(), 10u);
    double clean = 0.0, late = 0.0;
    for (std::size_t b = 0; b < 5; ++b) clean += rows[b].smoothed / 5.0;
    for (std::size_t b = 5; b < 10; ++b) late += rows[b].smoothed / 5.0;
    EXPECT_LT(late, clean) << "seed " << seed;
  }
}

TEST_F(FullRuns, DriftScoreCorrelatesWithError) {
  for (auto seed : kSeeds) {
    const auto& rows = injected(seed).batches;
    std::vector<double> d, e;
    for (const auto& row : rows) {
      d.push_back(row.components.drift);
      e.push_back(row.components.error);
    }
    EXPECT_GT(report::pearson(d, e), 0.0) << "seed " << seed;
  }
}

TEST_F(FullRuns, CorrelationMatrixIsSymmetricWithUnitDiagonal) {
  const auto m = report::metric_correlation(injected(7));
  ASSERT_EQ(m.size(), 8u);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(m[i][i], 1.0);
    for (std::size_t j = 0; j < m.size(); ++j) EXPECT_EQ(m[i][j], m[j][i]);
  }
}

TEST_F(FullRuns, SameConfigTwiceGivesIdenticalReport) {
  const auto again = execute(config(7)).report;
  EXPECT_EQ(again.to_json().dump(2), injected(7).to_json().dump(2));
}

}  // namespace
}  // namespace cts::pipeline
