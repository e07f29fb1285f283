#pragma once

#include <optional>
#include <span>
#include <vector>

namespace cts::drift {

inline constexpr double kProportionFloor = 1e-6;
inline constexpr std::size_t kDefaultBins = 10;

/// Binned distribution. Bin i covers [edges[i], edges[i+1]); the last bin is
/// closed. Proportions are floored at kProportionFloor and renormalized.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> proportions;

  std::size_t bins() const noexcept { return proportions.size(); }

  /// Wraps explicit proportions (normalized, then floored). Throws
  /// std::invalid_argument when sizes disagree or the mass is not positive.
  static Histogram from_proportions(std::vector<double> edges, std::vector<double> proportions);
};

/// Quantile boundaries at i/bins (linear interpolation between order
/// statistics) with duplicates removed. A constant input yields {v, v}.
std::vector<double> quantile_edges(std::span<const double> values, std::size_t bins = kDefaultBins);

/// Unit-width bins centred on integer codes 0..max_code.
std::vector<double> categorical_edges(int max_code);

/// Histogram of `values` over `reference_edges`, or over their own quantile
/// edges when absent. Values outside the edges land in the boundary bins.
/// Throws std::invalid_argument on empty input.
Histogram build_histogram(std::span<const double> values,
                          const std::optional<std::vector<double>>& reference_edges = std::nullopt,
                          std::size_t bins = kDefaultBins);

/// Population stability index sum (A - E) ln(A / E), in nats. Throws
/// std::invalid_argument when the edges differ.
double psi(const Histogram& expected, const Histogram& actual);

/// Jensen-Shannon divergence in nats, bounded by ln 2.
double jsd(const Histogram& p, const Histogram& q);

/// Kullback-Leibler divergence of two proportion vectors, in nats.
double kl_divergence(std::span<const double> p, std::span<const double> q);

}  // namespace cts::drift
