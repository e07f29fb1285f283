#include "cts/trust.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cts/random.hpp"

namespace cts::trust {

void TrustWeights::validate() const {
  const double w[] = {alpha, beta, gamma, delta, zeta};
  for (double v : w) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("trust weights must lie in [0,1]");
  }
  if (std::abs(alpha + beta + gamma + delta + zeta - 1.0) > 1e-9) {
    throw std::invalid_argument("trust weights must sum to 1");
  }
}

double trust_score(const TrustComponents& c, const TrustWeights& w) {
  w.validate();
  const double parts[] = {c.drift, c.uncertainty, c.violation, c.error, c.consistency};
  for (double v : parts) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("trust components must lie in [0,1]");
  }
  const double penalty = w.alpha * c.drift + w.beta * c.uncertainty + w.gamma * c.violation +
                         w.delta * c.error + w.zeta * c.consistency;
  return std::clamp(1.0 - penalty, 0.0, 1.0);
}

double trust_score(double drift, double uncertainty, double violation, double error,
                   double consistency, const TrustWeights& weights) {
  return trust_score(TrustComponents{drift, uncertainty, violation, error, consistency}, weights);
}

std::vector<double> ema_smooth(std::span<const double> values, double lambda) {
  if (values.empty()) throw std::invalid_argument("ema_smooth needs a non-empty sequence");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("EMA lambda must lie in (0,1]");
  std::vector<double> out(values.size());
  out[0] = values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    out[i] = lambda * values[i] + (1.0 - lambda) * out[i - 1];
  }
  return out;
}

namespace {

void require_pairs(const Matrix& original, const Matrix& flipped) {
  if (original.rows() == 0) throw std::invalid_argument("counterfactual metrics need a non-empty batch");
  if (original.rows() != flipped.rows() || original.cols() != flipped.cols()) {
    throw std::invalid_argument("original and counterfactual batches differ in shape");
  }
}

}  // namespace

double fairness_violation_rate(const reward::RewardModel& model, const Matrix& original,
                               const Matrix& flipped) {
  require_pairs(original, flipped);
  std::size_t changed = 0;
  for (Eigen::Index i = 0; i < original.rows(); ++i) {
    changed += static_cast<std::size_t>(model.predict(row_of(original, i)) !=
                                        model.predict(row_of(flipped, i)));
  }
  return static_cast<double>(changed) / static_cast<double>(original.rows());
}

double counterfactual_consistency(const reward::RewardModel& model, const Matrix& original,
                                  const Matrix& flipped) {
  require_pairs(original, flipped);
  double total = 0.0;
  for (Eigen::Index i = 0; i < original.rows(); ++i) {
    total += std::abs(model.positive_probability(row_of(original, i)) -
                      model.positive_probability(row_of(flipped, i)));
  }
  return total / static_cast<double>(original.rows());
}

std::vector<FeatureImportance> feature_importance(const reward::RewardModel& model,
                                                  const Matrix& features,
                                                  std::span<const int> labels,
                                                  std::span<const FeatureGroup> groups,
                                                  std::uint64_t seed, std::size_t repeats) {
  if (features.rows() == 0) throw std::invalid_argument("feature importance needs evaluation rows");
  if (repeats == 0) throw std::invalid_argument("feature importance needs at least one repeat");
  const double baseline = reward::accuracy(model, features, labels);
  const auto n = static_cast<std::size_t>(features.rows());

  std::vector<FeatureImportance> out;
  for (const auto& group : groups) {
    double drop = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(seed, group.name, r));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span(perm));
      Matrix shuffled = features;
      for (auto c : group.columns) {
        const auto col = static_cast<Eigen::Index>(c);
        for (std::size_t i = 0; i < n; ++i) {
          shuffled(static_cast<Eigen::Index>(i), col) = features(static_cast<Eigen::Index>(perm[i]), col);
        }
      }
      drop += baseline - reward::accuracy(model, shuffled, labels);
    }
    out.push_back({group.name, drop / static_cast<double>(repeats)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.group < b.group;
  });
  return out;
}

std::vector<std::size_t> TrustTimeline::alerts(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].smoothed < threshold) out.push_back(i);
  }
  return out;
}

nlohmann::json TrustTimeline::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    arr.push_back({{"batch", i + 1},
                   {"D", r.components.drift},
                   {"u_bar", r.components.uncertainty},
                   {"R", r.components.violation},
                   {"E", r.components.error},
                   {"C", r.components.consistency},
                   {"T", r.trust},
                   {"T_smoothed", r.smoothed}});
  }
  return {{"lambda", lambda}, {"batches", std::move(arr)}};
}

TrustTimeline build_timeline(std::span<const TrustComponents> batches, const TrustWeights& weights,
                             double lambda) {
  TrustTimeline timeline;
  timeline.lambda = lambda;
  std::vector<double> raw;
  for (const auto& c : batches) {
    raw.push_back(trust_score(c, weights));
    timeline.rows.push_back({c, raw.back(), 0.0});
  }
  const auto smoothed = ema_smooth(raw, lambda);
  for (std::size_t i = 0; i < smoothed.size(); ++i) timeline.rows[i].smoothed = smoothed[i];
  return timeline;
}

}  // namespace cts::trust
