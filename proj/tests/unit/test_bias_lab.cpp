#include <algorithm>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "cts/bias_lab.hpp"
#include "cts/error.hpp"
#include "cts/featurize.hpp"
#include "cts/random.hpp"
#include "test_support.hpp"

namespace cts::bias {
namespace {

std::vector<Record> make_batch(std::size_t n, std::size_t politics, std::size_t positives,
                               const std::string& title = "plain headline") {
  std::vector<Record> batch;
  for (std::size_t i = 0; i < n; ++i) {
    Record r;
    r.id = "r" + std::to_string(i);
    r.title = title;
    r.subject = i < politics ? "politics" : "world";
    r.source = "wire";
    r.label = i < positives ? 1 : 0;
    r.protected_group = static_cast<int>(i % 2);
    r.date = Date{17000 + static_cast<int>(i)};
    batch.push_back(r);
  }
  return batch;
}

std::size_t count_subject(const std::vector<Record>& batch, const std::string& subject) {
  return static_cast<std::size_t>(
      std::count_if(batch.begin(), batch.end(), [&](const Record& r) { return r.subject == subject; }));
}

std::size_t count_positive(const std::vector<Record>& batch) {
  return static_cast<std::size_t>(
      std::count_if(batch.begin(), batch.end(), [](const Record& r) { return r.label == 1; }));
}

TEST(Lexicon, DefaultHasFortyPairs) {
  const auto& lex = default_lexicon();
  EXPECT_EQ(lex.size(), 40u);
  EXPECT_EQ(lex.front(), (LexiconEntry{"good", "bad"}));
}

TEST(Lexicon, ParsesCommentsAndRejectsMalformedLines) {
  const auto lex = parse_lexicon("# header\nup down  # trailing\n\nleft right\n");
  ASSERT_EQ(lex.size(), 2u);
  EXPECT_EQ(lex[1], (LexiconEntry{"left", "right"}));
  EXPECT_THROW(parse_lexicon("lonely\n"), DataError);
}

TEST(SubjectSkew, FactorOneIsIdentity) {
  const auto batch = make_batch(100, 20, 50);
  const auto out = inject_subject_skew(batch, "politics", 1.0, 1);
  EXPECT_EQ(out.records, batch);
  EXPECT_TRUE(out.audit.empty());
}

TEST(SubjectSkew, DoublesShareByDuplication) {
  const auto batch = make_batch(100, 20, 50);
  const auto out = inject_subject_skew(batch, "politics", 2.0, 1);
  // (20 + d) / (100 + d) = 0.4 gives d = 33.3; one record of slack.
  const double share = double(count_subject(out.records, "politics")) / double(out.records.size());
  EXPECT_NEAR(share, 0.4, 1.0 / 100.0);
  EXPECT_GE(out.records.size(), 133u);
  EXPECT_LE(out.records.size(), 135u);
  EXPECT_EQ(out.audit.size(), out.records.size() - 100);
  // Originals keep their labels and duplicates get fresh ids.
  std::map<std::string, int> labels;
  for (const auto& r : out.records) labels[r.id] = r.label;
  for (const auto& r : batch) EXPECT_EQ(labels.at(r.id), r.label);
  std::set<std::string> ids;
  for (const auto& r : out.records) ids.insert(r.id);
  EXPECT_EQ(ids.size(), out.records.size());
}

TEST(SubjectSkew, AbsentSubjectIsError) {
  const auto batch = make_batch(10, 0, 5);
  EXPECT_THROW(inject_subject_skew(batch, "politics", 2.0, 1), std::invalid_argument);
  EXPECT_THROW(inject_subject_skew(make_batch(10, 2, 5), "politics", 0.5, 1), std::invalid_argument);
}

TEST(SubjectSkew, UnreachableFullShareIsError) {
  const auto batch = make_batch(10, 6, 5);
  EXPECT_THROW(inject_subject_skew(batch, "politics", 2.0, 1), std::invalid_argument);
}

TEST(Framing, ZeroRateIsIdentity) {
  const auto batch = make_batch(20, 5, 10, "good strong gains");
  const auto out = inject_framing(batch, default_lexicon(), 0.0, 3);
  EXPECT_EQ(out.records, batch);
  EXPECT_TRUE(out.audit.empty());
}

TEST(Framing, CertainSwap) {
  const auto batch = make_batch(1, 0, 1, "good deal for workers");
  const auto out = inject_framing(batch, {{"good", "bad"}}, 1.0, 3);
  EXPECT_EQ(out.records[0].title, "bad deal for workers");
  ASSERT_EQ(out.audit.size(), 1u);
  EXPECT_EQ(out.audit[0].before, "good deal for workers");
  EXPECT_EQ(out.audit[0].after, "bad deal for workers");
  EXPECT_EQ(out.audit[0].operation, "framing");
}

TEST(Framing, HalfRateSwapCountWithinBinomialInterval) {
  const auto oracle = testing::load_fixture("binomial_oracle.json");
  const auto batch = make_batch(1000, 0, 500, "good news today");
  const auto out = inject_framing(batch, default_lexicon(), 0.5, 11);
  std::size_t swapped = 0;
  for (const auto& r : out.records) swapped += r.title == "bad news today";
  EXPECT_EQ(swapped, out.audit.size());
  EXPECT_GE(swapped, oracle["lower"].get<std::size_t>());
  EXPECT_LE(swapped, oracle["upper"].get<std::size_t>());
  EXPECT_GE(swapped, 430u);
  EXPECT_LE(swapped, 570u);
}

TEST(Framing, PreservesCountAndLabels) {
  const auto batch = make_batch(50, 10, 20, "strong growth and rise");
  const auto out = inject_framing(batch, default_lexicon(), 0.7, 5);
  ASSERT_EQ(out.records.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(out.records[i].label, batch[i].label);
}

TEST(LabelDrift, TargetEqualsCurrentRateFlipsNothing) {
  const auto batch = make_batch(10, 0, 5);
  const auto out = inject_label_drift(batch, 0.5, 1);
  EXPECT_EQ(out.records, batch);
  EXPECT_TRUE(out.audit.empty());
}

TEST(LabelDrift, FlipsExactlyThreeNegatives) {
  const auto batch = make_batch(10, 0, 5);
  const auto out = inject_label_drift(batch, 0.8, 1);
  EXPECT_EQ(count_positive(out.records), 8u);
  EXPECT_EQ(out.audit.size(), 3u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(out.records[i].label, 1);
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(out.records[i].title, batch[i].title);
}

TEST(LabelDrift, SaturatesAtOne) {
  const auto out = inject_label_drift(make_batch(30, 0, 4), 1.0, 2);
  EXPECT_EQ(count_positive(out.records), 30u);
}

TEST(LabelDrift, LowersRateToo) {
  const auto out = inject_label_drift(make_batch(20, 0, 15), 0.25, 2);
  EXPECT_EQ(count_positive(out.records), 5u);
}

TEST(LabelDrift, RejectsBadTargets) {
  EXPECT_THROW(inject_label_drift(make_batch(10, 0, 5), 1.5, 1), std::invalid_argument);
  EXPECT_THROW(inject_label_drift({}, 0.5, 1), std::invalid_argument);
}

TEST(Counterfactual, FlipsOnlyProtected) {
  auto r = make_batch(1, 1, 1)[0];
  r.protected_group = 0;
  const auto pair = make_counterfactual(r);
  EXPECT_EQ(pair.original, r);
  EXPECT_EQ(pair.flipped.protected_group, 1);
  auto back = pair.flipped;
  back.protected_group = 0;
  EXPECT_EQ(back, r);
}

TEST(Counterfactual, InvolutionOnEveryRecord) {
  for (const auto& r : make_batch(200, 50, 100)) {
    EXPECT_EQ(make_counterfactual(make_counterfactual(r).flipped).flipped, r);
  }
  auto bad = make_batch(1, 0, 0)[0];
  bad.protected_group = 2;
  EXPECT_THROW(make_counterfactual(bad), std::invalid_argument);
}

BatchSeries small_series() {
  BatchSeries s;
  for (int b = 0; b < 4; ++b) {
    auto batch = make_batch(40, 10, 20, "good strong gains ahead");
    for (auto& r : batch) r.id = "b" + std::to_string(b) + r.id;
    s.batches.push_back(batch);
  }
  s.clean_prefix = 2;
  return s;
}

TEST(ApplyPlan, NeverTouchesCleanPrefixAndIsReplayable) {
  const auto clean = small_series();
  const auto plan = InjectionPlan::standard(clean.k(), clean.clean_prefix);
  EXPECT_EQ(plan.target_batches, (std::vector<std::size_t>{2, 3}));
  const auto a = apply_plan(clean, plan, 9);
  const auto b = apply_plan(clean, plan, 9);
  EXPECT_EQ(a.series.batches[0], clean.batches[0]);
  EXPECT_EQ(a.series.batches[1], clean.batches[1]);
  EXPECT_NE(a.series.batches[2], clean.batches[2]);
  EXPECT_EQ(a.series.batches, b.series.batches);
  ASSERT_EQ(a.audit.size(), b.audit.size());
  std::map<std::string, int> ops;
  for (const auto& e : a.audit) {
    EXPECT_GE(e.batch, 2u);
    ++ops[e.operation];
  }
  EXPECT_GT(ops["subject_skew"], 0);
  EXPECT_GT(ops["framing"], 0);
  EXPECT_GT(ops["label_drift"], 0);
  for (std::size_t t = 2; t < 4; ++t) {
    const auto& batch = a.series.batches[t];
    EXPECT_NEAR(double(count_positive(batch)) / double(batch.size()), 0.8, 0.5 / double(batch.size()));
  }
}

TEST(ApplyPlan, ValidationRejectsCleanTargets) {
  const auto clean = small_series();
  InjectionPlan plan;
  plan.target_batches = {1};
  EXPECT_THROW(apply_plan(clean, plan, 1), ConfigError);
  plan.target_batches = {4};
  EXPECT_THROW(apply_plan(clean, plan, 1), ConfigError);
  plan.target_batches = {2, 3};
  plan.label_drift = {0.5, 0.6, 0.7};
  EXPECT_THROW(apply_plan(clean, plan, 1), ConfigError);
}

TEST(AuditEntry, SerializesAllFields) {
  const AuditEntry e{3, "id1", "framing", "title", "good", "bad"};
  const auto j = e.to_json();
  EXPECT_EQ(j["batch"], 4);  // written 1-based
  EXPECT_EQ(j["record_id"], "id1");
  EXPECT_EQ(j["after"], "bad");
}

}  // namespace
}  // namespace cts::bias
