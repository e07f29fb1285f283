#include "cts/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cts::drift {

Matrix softmax_rows(const Matrix& scores) {
  Matrix out(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double top = scores.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      out(i, j) = std::exp(scores(i, j) - top);
      total += out(i, j);
    }
    out.row(i) /= total;
  }
  return out;
}

Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, std::size_t d_k) {
  if (d_k == 0) throw std::invalid_argument("attention key dimension must be positive");
  if (q.cols() != k.cols()) throw std::invalid_argument("query and key widths differ");
  if (k.rows() != v.rows()) throw std::invalid_argument("key and value counts differ");
  if (k.rows() == 0) throw std::invalid_argument("attention needs at least one key");
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_k));

  Matrix out = Matrix::Zero(q.rows(), v.cols());
  std::vector<double> score(static_cast<std::size_t>(k.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double top = -INFINITY;
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < q.cols(); ++c) s += q(i, c) * k(j, c);
      score[static_cast<std::size_t>(j)] = s * scale;
      top = std::max(top, score[static_cast<std::size_t>(j)]);
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < k.rows(); ++j) {
      const double w = std::exp(score[static_cast<std::size_t>(j)] - top);
      total += w;
      for (Eigen::Index c = 0; c < v.cols(); ++c) out(i, c) += w * v(j, c);
    }
    out.row(i) /= total;
  }
  return out;
}

}  // namespace cts::drift
