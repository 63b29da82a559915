#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "covlqr/control_core.hpp"
#include "covlqr/errors.hpp"
#include "support.hpp"

namespace covlqr {
namespace {

using testing::Rng;

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

SystemModel scalar_model(double a, double b) {
  return SystemModel{Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b)};
}

PenaltyPair scalar_penalties(double q, double r) {
  return PenaltyPair{Matrix::Constant(1, 1, q), Matrix::Constant(1, 1, r)};
}

// Characteristic polynomial coefficients by Faddeev-LeVerrier, highest first.
std::vector<double> charpoly(const Matrix& A) {
  const Eigen::Index n = A.rows();
  std::vector<double> c(n + 1);
  c[0] = 1.0;
  Matrix M = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    M = A * M + c[k - 1] * Matrix::Identity(n, n);
    c[k] = -(A * M).trace() / static_cast<double>(k);
  }
  return c;
}

// Largest root of a polynomial with only real roots, by Newton from above
// the Cauchy bound.
double largest_real_root(const std::vector<double>& c) {
  double bound = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) bound = std::max(bound, std::abs(c[i]));
  double x = 1.0 + bound;
  for (int it = 0; it < 500; ++it) {
    double p = 0.0, dp = 0.0;
    for (double ci : c) {
      dp = dp * x + p;
      p = p * x + ci;
    }
    if (dp == 0.0) break;
    const double step = p / dp;
    x -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

TEST(SpectralRadius, NilpotentIsZero) {
  Matrix N(2, 2);
  N << 0, 1, 0, 0;
  EXPECT_NEAR(spectral_radius(N), 0.0, 1e-12);
}

TEST(SpectralRadius, IdentityIsOne) {
  EXPECT_NEAR(spectral_radius(Matrix::Identity(3, 3)), 1.0, 1e-14);
}

TEST(SpectralRadius, BenchmarkMatchesCharacteristicPolynomial) {
  const Matrix A = SystemModel::laplacian_benchmark().A;
  const double oracle = largest_real_root(charpoly(A));
  const double rho = spectral_radius(A);
  EXPECT_NEAR(rho, oracle, 1e-10);
  EXPECT_GT(rho, 1.0);
  EXPECT_LT(rho, 1.03);
}

TEST(SpectralRadius, HomogeneousInScalar) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Matrix F = rng.gaussian(4, 4);
    const double c = rng.uniform(-3.0, 3.0);
    EXPECT_NEAR(spectral_radius(c * F), std::abs(c) * spectral_radius(F),
                1e-10 * (1.0 + spectral_radius(F)));
  }
}

TEST(IsStabilizing, ZeroClosedLoop) {
  const SystemModel model{Matrix::Zero(3, 3), Matrix::Identity(3, 3)};
  EXPECT_TRUE(is_stabilizing(model, Matrix::Zero(3, 3)));
}

TEST(IsStabilizing, UncontrollableUnstableMode) {
  const SystemModel model = scalar_model(2.0, 0.0);
  for (double k : {-10.0, 0.0, 3.0}) EXPECT_FALSE(is_stabilizing(model, Matrix::Constant(1, 1, k)));
}

TEST(IsStabilizing, RejectsWrongGainShape) {
  const SystemModel model = SystemModel::laplacian_benchmark();
  EXPECT_THROW(is_stabilizing(model, Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST(SolveDlyap, ZeroLoopGivesNoiseCovariance) {
  const Matrix S = solve_dlyap(Matrix::Zero(3, 3), Matrix::Identity(3, 3));
  EXPECT_LT((S - Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(SolveDlyap, ScalarGeometricSeries) {
  const Matrix S = solve_dlyap(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0));
  EXPECT_NEAR(S(0, 0), 4.0 / 3.0, 1e-14);
}

TEST(SolveDlyap, MatchesPowerSeries) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix F = rng.with_radius(3, 0.8);
    const Matrix W = rng.spd(3);
    Matrix series = Matrix::Zero(3, 3);
    Matrix term = W;
    for (int k = 0; k < 4000 && term.norm() > 1e-18; ++k) {
      series += term;
      term = F * term * F.transpose();
    }
    EXPECT_LT((solve_dlyap(F, W) - series).norm(), 1e-8) << "trial " << trial;
  }
}

TEST(SolveDlyap, ResidualBoundOnRandomStableLoops) {
  Rng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = rng.integer(1, 6);
    const Matrix F = rng.with_radius(n, rng.uniform(0.0, 0.95));
    const Matrix W = Matrix::Identity(n, n);
    const Matrix S = solve_dlyap(F, W);
    EXPECT_LE((S - W - F * S * F.transpose()).norm(), 1e-10 * (1.0 + S.norm()));
    EXPECT_EQ(S, S.transpose());
    EXPECT_GE(min_eigenvalue(S - W), -1e-10);
  }
}

TEST(SolveDlyap, DoublingPathForLargeSystems) {
  Rng rng(23);
  const Matrix F = rng.with_radius(60, 0.9);
  const Matrix W = Matrix::Identity(60, 60);
  const Matrix S = solve_dlyap(F, W);
  EXPECT_LE((S - W - F * S * F.transpose()).norm(), 1e-10 * (1.0 + S.norm()));
}

TEST(SolveDlyap, UnstableLoopThrowsNotStable) {
  try {
    solve_dlyap(Matrix::Constant(1, 1, 1.5), Matrix::Constant(1, 1, 1.0));
    FAIL() << "expected NotStable";
  } catch (const NotStable& e) {
    EXPECT_NEAR(e.radius(), 1.5, 1e-14);
  }
  EXPECT_THROW(solve_dlyap(SystemModel::laplacian_benchmark().A, Matrix::Identity(3, 3)), NotStable);
}

TEST(SolveDlyap, RejectsShapeMismatch) {
  EXPECT_THROW(solve_dlyap(Matrix::Zero(2, 2), Matrix::Identity(3, 3)), DimensionMismatch);
}

TEST(LqrCost, ZeroDynamicsTraceOfQ) {
  const SystemModel model{Matrix::Zero(3, 3), Matrix::Identity(3, 3)};
  const PenaltyPair pen{Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
  EXPECT_NEAR(lqr_cost(model, pen, Matrix::Zero(3, 3)), 3.0, 1e-14);
}

TEST(LqrCost, ScalarOptimalGainGivesGoldenRatio) {
  const double k = -kGolden / (1.0 + kGolden);
  EXPECT_NEAR(lqr_cost(scalar_model(1, 1), scalar_penalties(1, 1), Matrix::Constant(1, 1, k)),
              kGolden, 1e-12);
}

TEST(LqrCost, UnstableGainThrows) {
  EXPECT_THROW(lqr_cost(scalar_model(1, 1), scalar_penalties(1, 1), Matrix::Constant(1, 1, 0.5)),
               NotStable);
}

TEST(LqrCost, OptimalGainMatchesDareCost) {
  const auto model = SystemModel::laplacian_benchmark();
  const auto pen = PenaltyPair::laplacian_benchmark();
  const DareSolution dare = solve_dare(model, pen);
  EXPECT_NEAR(lqr_cost(model, pen, dare.K), dare.cost, 1e-8 * dare.cost);
}

TEST(LqrCost, PerturbedGainsAreNoBetter) {
  const auto model = SystemModel::laplacian_benchmark();
  const auto pen = PenaltyPair::laplacian_benchmark();
  const DareSolution dare = solve_dare(model, pen);
  Rng rng(5);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const Matrix K = dare.K + rng.uniform(0.001, 0.3) * rng.gaussian(3, 3);
    if (!is_stabilizing(model, K)) continue;
    ++checked;
    EXPECT_GE(lqr_cost(model, pen, K), dare.cost - 1e-10);
  }
  EXPECT_GT(checked, 50);
}

TEST(SolveDare, ZeroDynamics) {
  const SystemModel model{Matrix::Zero(2, 2), Matrix::Identity(2, 2)};
  const PenaltyPair pen{Matrix::Identity(2, 2) * 2.0, Matrix::Identity(2, 2)};
  const DareSolution s = solve_dare(model, pen);
  EXPECT_LT((s.P - pen.Q).norm(), 1e-14);
  EXPECT_LT(s.K.norm(), 1e-14);
  EXPECT_NEAR(s.cost, 4.0, 1e-14);
}

TEST(SolveDare, ScalarQuadraticRoot) {
  const DareSolution s = solve_dare(scalar_model(1, 1), scalar_penalties(1, 1));
  EXPECT_NEAR(s.P(0, 0), kGolden, 1e-10);
  EXPECT_NEAR(s.K(0, 0), -kGolden / (1.0 + kGolden), 1e-10);
  EXPECT_NEAR(s.K(0, 0), -0.618034, 1e-6);
}

TEST(SolveDare, BenchmarkOptimalCost) {
  const auto model = SystemModel::laplacian_benchmark();
  const auto pen = PenaltyPair::laplacian_benchmark();
  const DareSolution s = solve_dare(model, pen);
  // scipy.linalg.solve_discrete_are on the same data.
  EXPECT_NEAR(s.cost, 3.00305764546938, 1e-11);
  EXPECT_LT(spectral_radius(model.A + model.B * s.K), 1.0);
  EXPECT_LE((riccati_map(model, pen, s.P) - s.P).norm(), 1e-10 * (1.0 + s.P.norm()));
}

TEST(SolveDare, FixedPointOnRandomSystems) {
  Rng rng(29);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Index n = rng.integer(1, 4);
    const Eigen::Index m = rng.integer(1, 3);
    const SystemModel model{rng.with_radius(n, rng.uniform(0.5, 1.3)), rng.gaussian(n, m)};
    const PenaltyPair pen{rng.spd(n), rng.spd(m)};
    const DareSolution s = solve_dare(model, pen);
    EXPECT_LE((riccati_map(model, pen, s.P) - s.P).norm(), 1e-10 * (1.0 + s.P.norm()));
    EXPECT_LT(spectral_radius(model.A + model.B * s.K), 1.0);
    EXPECT_NEAR(s.cost, s.P.trace(), 1e-12 * s.cost);
  }
}

TEST(SolveDare, NonStabilizableThrowsNoConvergence) {
  EXPECT_THROW(solve_dare(scalar_model(2.0, 0.0), scalar_penalties(1, 1)), NoConvergence);
  DareOptions few;
  few.max_iterations = 2;
  EXPECT_THROW(solve_dare(SystemModel::laplacian_benchmark(), PenaltyPair::laplacian_benchmark(), few),
               NoConvergence);
}

TEST(RegularizedCost, ZeroLambdaIsTraceForm) {
  Rng rng(31);
  const PenaltyPair pen{rng.spd(3), rng.spd(2)};
  const Matrix K = rng.gaussian(2, 3);
  const Matrix Sigma = rng.spd(3);
  const Matrix Phi = rng.spd(5);
  const double expected = ((pen.Q + K.transpose() * pen.R * K) * Sigma).trace();
  EXPECT_NEAR(regularized_cost(K, Sigma, Phi, pen, 0.0), expected, 1e-12 * std::abs(expected));
}

TEST(RegularizedCost, BlockArithmetic) {
  for (Eigen::Index n : {1, 3}) {
    const PenaltyPair pen{Matrix::Identity(n, n), Matrix::Identity(2, 2)};
    const double c = regularized_cost(Matrix::Zero(2, n), Matrix::Identity(n, n),
                                      Matrix::Identity(n + 2, n + 2), pen, 1.0);
    EXPECT_NEAR(c, 2.0 * static_cast<double>(n), 1e-14);
  }
}

TEST(RegularizedCost, NegativeLambdaAllowed) {
  const PenaltyPair pen{Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  const double c = regularized_cost(Matrix::Zero(1, 1), Matrix::Identity(1, 1),
                                    Matrix::Identity(2, 2), pen, -0.5);
  EXPECT_NEAR(c, 0.5, 1e-14);
}

TEST(RegularizedCost, SingularPhiThrows) {
  const PenaltyPair pen = PenaltyPair::laplacian_benchmark();
  EXPECT_THROW(regularized_cost(Matrix::Zero(3, 3), Matrix::Identity(3, 3), Matrix::Zero(6, 6), pen, 1.0),
               SingularPhi);
}

TEST(Validation, RejectsBadModelsAndPenalties) {
  EXPECT_THROW((SystemModel{Matrix::Zero(2, 3), Matrix::Zero(2, 1)}.validate()), DimensionMismatch);
  EXPECT_THROW((SystemModel{Matrix::Zero(2, 2), Matrix::Zero(3, 1)}.validate()), DimensionMismatch);
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW((SystemModel{bad, Matrix::Zero(2, 1)}.validate()), std::invalid_argument);
  EXPECT_THROW((PenaltyPair{Matrix::Zero(2, 2), Matrix::Identity(1, 1)}.validate(2, 1)),
               std::invalid_argument);
  EXPECT_NO_THROW(PenaltyPair::laplacian_benchmark().validate(3, 3));
}

}  // namespace
}  // namespace covlqr
