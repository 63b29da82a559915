#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "covlqr/errors.hpp"
#include "covlqr/sysid.hpp"
#include "support.hpp"

namespace covlqr {
namespace {

const SystemModel kBench = SystemModel::laplacian_benchmark();

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

TEST(LeastSquares, NoiselessRecoversModel) {
  const SampleCov c = testing::benchmark_cov(0.0, 12);
  const Estimate e = least_squares(c);
  EXPECT_LE((e.A_hat - kBench.A).norm(), 1e-10);
  EXPECT_LE((e.B_hat - kBench.B).norm(), 1e-10);
  EXPECT_FALSE(e.residual.has_value());
}

TEST(LeastSquares, ScalarTwoEquations) {
  DataBatch b;
  b.X0 = (Matrix(1, 2) << 1, 0).finished();
  b.U0 = (Matrix(1, 2) << 0, 1).finished();
  b.X1 = (Matrix(1, 2) << 0.9, 1).finished();
  b.W0 = Matrix::Zero(1, 2);
  const Estimate e = least_squares(b);
  EXPECT_NEAR(e.A_hat(0, 0), 0.9, 1e-14);
  EXPECT_NEAR(e.B_hat(0, 0), 1.0, 1e-14);
  ASSERT_TRUE(e.residual.has_value());
  EXPECT_NEAR(*e.residual, 0.0, 1e-14);
}

TEST(LeastSquares, RawDataFormMatchesCovarianceForm) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DataBatch b = generate_batch(kBench, 20, 0.7, DataMode::iid_pairs, s);
    const Matrix D0 = b.stacked_inputs_states();
    const Matrix raw = b.X1 * D0.completeOrthogonalDecomposition().pseudoInverse();
    const Estimate e = least_squares(sample_covariances(b));
    EXPECT_LE((e.stacked() - raw).norm(), 1e-10 * raw.norm());
    EXPECT_LE((least_squares(b).stacked() - raw).norm(), 1e-10 * raw.norm());
  }
}

TEST(LeastSquares, SingularPhiThrows) {
  const DataBatch b = generate_batch(kBench, 4, 0.1, DataMode::iid_pairs, 0);
  EXPECT_THROW(least_squares(sample_covariances(b)), SingularPhi);
  EXPECT_THROW(estimator_covariance(sample_covariances(b)), SingularPhi);
}

TEST(LeastSquares, ErrorShrinksAtInverseSqrtRate) {
  const std::vector<double> ts{20, 80, 320};
  std::vector<double> errs;
  for (double t : ts) {
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const Estimate e = least_squares(testing::benchmark_cov(0.7, trial_seed(3, s), static_cast<Eigen::Index>(t)));
      Matrix truth(3, 6);
      truth << kBench.B, kBench.A;
      sum += (e.stacked() - truth).norm();
    }
    errs.push_back(sum / 200.0);
  }
  const double slope = loglog_slope(ts, errs);
  EXPECT_NEAR(slope, -0.5, 0.15);
}

TEST(LeastSquares, Unbiased) {
  const int seeds = 10000;
  const Eigen::Index t = 20;
  const double sigma = 0.7;
  Matrix truth(3, 6);
  truth << kBench.B, kBench.A;
  Matrix mean = Matrix::Zero(3, 6);
  Matrix sq = Matrix::Zero(3, 6);
  for (int s = 0; s < seeds; ++s) {
    const Matrix err = least_squares(testing::benchmark_cov(sigma, trial_seed(4, s), t)).stacked() - truth;
    mean += err;
    sq += err.cwiseProduct(err);
  }
  mean /= seeds;
  const Matrix var = sq / seeds - mean.cwiseProduct(mean);
  const Matrix stderr_ = (var / seeds).cwiseSqrt();
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 6; ++j) EXPECT_LE(std::abs(mean(i, j)), 5.0 * stderr_(i, j));
}

TEST(LeastSquares, ConditionalVarianceLaw) {
  const int seeds = 10000;
  const Eigen::Index t = 100;
  const double sigma = 1.0;
  Matrix truth_row(1, 6);
  truth_row << kBench.B.row(0), kBench.A.row(0);
  Matrix emp = Matrix::Zero(6, 6);
  Matrix predicted = Matrix::Zero(6, 6);
  for (int s = 0; s < seeds; ++s) {
    const SampleCov c = testing::benchmark_cov(sigma, trial_seed(5, s), t);
    const Matrix e = least_squares(c).stacked().row(0) - truth_row;
    emp += e.transpose() * e;
    predicted += sigma * sigma * estimator_covariance(c);
  }
  emp /= seeds;
  predicted /= seeds;
  EXPECT_LE((emp - predicted).norm() / predicted.norm(), 0.10);
}

TEST(EstimatorCovariance, ScalarExamples) {
  SampleCov c;
  c.Phi = Matrix::Identity(2, 2);
  c.t = 1;
  EXPECT_LE((estimator_covariance(c) - Matrix::Identity(2, 2)).norm(), 1e-15);
  c.Phi = 4.0 * Matrix::Identity(2, 2);
  c.t = 2;
  EXPECT_LE((estimator_covariance(c) - Matrix::Identity(2, 2) / 8.0).norm(), 1e-15);
}

// With iid N(0, I) columns t Phi is Wishart(I, t), so E[Tr(Phi^{-1}) / t] = d / (t - d - 1).
TEST(EstimatorCovariance, TraceMatchesInverseWishartMean) {
  for (Eigen::Index t : {20, 80, 320}) {
    std::vector<double> tr;
    for (std::uint64_t s = 0; s < 2000; ++s) {
      tr.push_back(estimator_covariance(testing::benchmark_cov(0.5, trial_seed(6, s), t)).trace());
    }
    double mean = 0.0, sq = 0.0;
    for (double v : tr) mean += v / tr.size();
    for (double v : tr) sq += (v - mean) * (v - mean) / (tr.size() - 1);
    const double expected = 6.0 / static_cast<double>(t - 7);
    EXPECT_NEAR(mean, expected, 5.0 * std::sqrt(sq / tr.size())) << "t = " << t;
  }
}

TEST(Lemma1, NoiselessMomentsVanish) {
  const Lemma1Moments m = lemma1_moments(kBench, 20, 0.0, 100);
  EXPECT_EQ(m.mean_norm, 0.0);
  EXPECT_EQ(m.var_error, 0.0);
}

TEST(Lemma1, BenchmarkMeanAtCltScale) {
  const long seeds = 10000;
  const Eigen::Index t = 20;
  const double sigma = 1.0;
  const Lemma1Moments m = lemma1_moments(kBench, t, sigma, seeds, 8);
  const double bound = 4.0 * sigma / std::sqrt(static_cast<double>(seeds * t));
  EXPECT_LE(m.mean_norm, 3.0 * bound) << "mean_norm=" << m.mean_norm << " bound=" << bound;
  EXPECT_LE(m.relative_var_error, 0.10);
}

TEST(Lemma1, ScalarVarianceMatchesKronecker) {
  const SystemModel scalar{Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0)};
  const Lemma1Moments m = lemma1_moments(scalar, 1, 1.0, 100000, 9);
  EXPECT_EQ(m.predicted_cov.rows(), 2);
  EXPECT_LE((m.predicted_cov - Matrix::Identity(2, 2)).norm(), 1e-15);
  EXPECT_LE(m.relative_var_error, 0.05);
}

}  // namespace
}  // namespace covlqr
