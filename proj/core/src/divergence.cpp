#include "cts/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cts::drift {

namespace {

void floor_and_normalize(std::vector<double>& p) {
  const double mass = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(mass > 0.0)) throw std::invalid_argument("histogram mass must be positive");
  for (double& v : p) v = std::max(v / mass, kProportionFloor);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= total;
}

void require_same_edges(const Histogram& a, const Histogram& b) {
  if (a.edges != b.edges || a.proportions.size() != b.proportions.size()) {
    throw std::invalid_argument("histograms have mismatched bin edges");
  }
}

}  // namespace

Histogram Histogram::from_proportions(std::vector<double> edges, std::vector<double> proportions) {
  if (edges.size() != proportions.size() + 1 || proportions.empty()) {
    throw std::invalid_argument("histogram needs |edges| = |proportions| + 1");
  }
  floor_and_normalize(proportions);
  return Histogram{std::move(edges), std::move(proportions)};
}

std::vector<double> quantile_edges(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw std::invalid_argument("quantile_edges needs values");
  if (bins == 0) throw std::invalid_argument("quantile_edges needs at least one bin");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  const double last = static_cast<double>(sorted.size() - 1);
  for (std::size_t i = 0; i <= bins; ++i) {
    const double h = last * static_cast<double>(i) / static_cast<double>(bins);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double q = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    if (edges.empty() || q > edges.back()) edges.push_back(q);
  }
  if (edges.size() == 1) edges.push_back(edges.front());
  return edges;
}

std::vector<double> categorical_edges(int max_code) {
  std::vector<double> edges;
  for (int c = 0; c <= max_code + 1; ++c) edges.push_back(static_cast<double>(c) - 0.5);
  return edges;
}

Histogram build_histogram(std::span<const double> values,
                          const std::optional<std::vector<double>>& reference_edges,
                          std::size_t bins) {
  if (values.empty()) throw std::invalid_argument("build_histogram needs values");
  std::vector<double> edges = reference_edges ? *reference_edges : quantile_edges(values, bins);
  if (edges.size() < 2) throw std::invalid_argument("histogram needs at least two edges");
  const std::size_t nbins = edges.size() - 1;
  std::vector<double> counts(nbins, 0.0);
  for (double v : values) {
    std::size_t b;
    if (v <= edges.front()) {
      b = 0;
    } else if (v >= edges.back()) {
      b = nbins - 1;
    } else {
      b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
    }
    counts[b] += 1.0;
  }
  return Histogram::from_proportions(std::move(edges), std::move(counts));
}

double psi(const Histogram& expected, const Histogram& actual) {
  require_same_edges(expected, actual);
  double total = 0.0;
  for (std::size_t i = 0; i < expected.bins(); ++i) {
    const double a = actual.proportions[i], e = expected.proportions[i];
    total += (a - e) * std::log(a / e);
  }
  return total;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
  }
  return total;
}

double jsd(const Histogram& p, const Histogram& q) {
  require_same_edges(p, q);
  std::vector<double> m(p.bins());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (p.proportions[i] + q.proportions[i]);
  const double value = 0.5 * kl_divergence(p.proportions, m) + 0.5 * kl_divergence(q.proportions, m);
  return std::clamp(value, 0.0, std::log(2.0));
}

}  // namespace cts::drift
