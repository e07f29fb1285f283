#pragma once

#include <span>

#include <Eigen/Core>

#include "cts/featurize.hpp"

namespace cts {

/// Row-per-sample matrix; rows are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

inline std::span<const double> row_of(const Matrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

/// Stacks FeatureVector::dense() rows.
Matrix to_matrix(std::span<const FeatureVector> features);

/// Copies the listed rows.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);

}  // namespace cts
