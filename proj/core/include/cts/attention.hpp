#pragma once

#include <cstddef>

#include "cts/matrix.hpp"

namespace cts::drift {

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& scores);

/// Scaled dot-product attention softmax(Q K^T / sqrt(d_k)) V.
///
/// Each output row is accumulated as (sum_j w_j v_j) / (sum_j w_j) over the
/// unnormalized weights, so equal scores give exactly the mean of V's rows.
/// Throws std::invalid_argument on inconsistent shapes or d_k == 0.
Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v, std::size_t d_k);

}  // namespace cts::drift
