#include <cmath>

#include <gtest/gtest.h>

#include "cts/attention.hpp"
#include "test_support.hpp"

namespace cts::drift {
namespace {

TEST(Attention, MatchesBruteForceOracle) {
  const auto cases = testing::load_fixture("attention_oracle.json");
  ASSERT_EQ(cases.size(), 50u);
  for (const auto& c : cases) {
    const Matrix q = testing::matrix_from_json(c["q"]);
    const Matrix k = testing::matrix_from_json(c["k"]);
    const Matrix v = testing::matrix_from_json(c["v"]);
    const Matrix expected = testing::matrix_from_json(c["out"]);
    const Matrix out = attention(q, k, v, c["d_k"].get<std::size_t>());
    ASSERT_EQ(out.rows(), expected.rows());
    ASSERT_EQ(out.cols(), expected.cols());
    EXPECT_LE((out - expected).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Attention, SingleToken) {
  Matrix one(1, 1);
  one << 1.0;
  EXPECT_EQ(attention(one, one, one, 1)(0, 0), 1.0);
}

TEST(Attention, EqualScoresReturnRowMeanExactly) {
  Matrix q(2, 2), k(3, 2), v(3, 2);
  q << 0, 0, 0, 0;
  k << 1, 2, -3, 4, 5, -6;
  v << 0.1, 0.7, 0.2, 0.8, 0.3, 1.2;
  const Matrix out = attention(q, k, v, 2);
  const Eigen::RowVectorXd mean = v.colwise().sum() / 3.0;
  for (Eigen::Index r = 0; r < 2; ++r) {
    EXPECT_EQ(out(r, 0), mean(0));
    EXPECT_EQ(out(r, 1), mean(1));
  }
}

TEST(Attention, TwoTokenHandExample) {
  const Matrix eye = Matrix::Identity(2, 2);
  const Matrix out = attention(eye, eye, eye, 2);
  const double hi = 0.6697615493266569;  // e^{1/sqrt 2} / (e^{1/sqrt 2} + 1)
  const double lo = 0.3302384506733431;
  EXPECT_NEAR(out(0, 0), hi, 1e-9);
  EXPECT_NEAR(out(0, 1), lo, 1e-9);
  EXPECT_NEAR(out(1, 0), lo, 1e-9);
  EXPECT_NEAR(out(1, 1), hi, 1e-9);
  const double w = std::exp(1.0 / std::sqrt(2.0));
  EXPECT_NEAR(hi, w / (w + 1.0), 1e-15);
}

TEST(Attention, RejectsBadShapes) {
  const Matrix a = Matrix::Ones(2, 3);
  const Matrix b = Matrix::Ones(2, 2);
  EXPECT_THROW(attention(a, b, b, 3), std::invalid_argument);
  EXPECT_THROW(attention(b, b, Matrix::Ones(3, 2), 2), std::invalid_argument);
  EXPECT_THROW(attention(b, b, b, 0), std::invalid_argument);
}

TEST(SoftmaxRows, StableForLargeScores) {
  Matrix s(1, 3);
  s << 1000.0, 1000.0, -1000.0;
  const Matrix p = softmax_rows(s);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p(0, 2), 0.0, 1e-15);
}

}  // namespace
}  // namespace cts::drift
