#pragma once

#include <optional>

#include "covlqr/conic.hpp"
#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"
#include "covlqr/sysid.hpp"

namespace covlqr {

/// Covariance parameterization V with Phi V = [K; I_n], shape (n+m) x n.
struct PolicyParam {
  Matrix V;
};

/// V = Phi^{-1} [K; I]. Throws SingularPhi.
PolicyParam parameterize(const SampleCov& cov, const Gain& K);

/// K = U0bar V.
Gain recover_gain(const SampleCov& cov, const PolicyParam& param);

/// Omega(V) = Tr(V Sigma V^T Phi).
double regularizer_omega(const PolicyParam& param, const SteadyCovariance& Sigma, const Matrix& Phi);

/// Tr(Phi^{-1} [K; I] Sigma [K; I]^T); equals regularizer_omega under
/// parameterize. Throws SingularPhi.
double regularizer_indirect(const Gain& K, const SteadyCovariance& Sigma, const Matrix& Phi);

struct GParamBridge {
  Matrix G;                    // D0^T V / t, t x n
  double relation_gap = 0.0;   // |Tr(G Sigma G^T) - Tr(V Sigma V^T Phi) / t|
  double reconstruction_gap = 0.0;  // ||D0 G - Phi V||_F
};

/// Minimum-norm data parameterization G matching V. `Sigma` defaults to I_n.
GParamBridge g_param_bridge(const DataBatch& batch, const PolicyParam& param,
                            const std::optional<SteadyCovariance>& Sigma = std::nullopt);

/// Difference between the data-based and true Lyapunov right-hand sides:
/// W V Sigma V^T X1^T + X1 V Sigma V^T W^T - W V Sigma V^T W^T, with the
/// bars dropped (W = W0bar, X1 = X1bar).
Matrix sigma_diff(const SampleCov& cov, const PolicyParam& param, const SteadyCovariance& Sigma);

/// sigma_diff split through X1bar = [B A] Phi + W0bar.
struct SigmaDiffTerms {
  Matrix quadratic;  // W V Sigma V^T W^T
  Matrix cross;      // W Y Phi [B A]^T + [B A] Phi Y W^T, Y = V Sigma V^T
  Matrix total() const { return quadratic + cross; }
};

SigmaDiffTerms sigma_diff_terms(const SystemModel& model, const SampleCov& cov,
                                const PolicyParam& param, const SteadyCovariance& Sigma);
Matrix sigma_diff_expanded(const SystemModel& model, const SampleCov& cov,
                           const PolicyParam& param, const SteadyCovariance& Sigma);

/// Outcome of a data-driven LQR design.
struct LqrSolution {
  Gain K;
  SteadyCovariance Sigma;  // certificate (SDP variable, or Lyapunov solution for CE)
  double objective = 0.0;
  conic::SolveStatus status = conic::SolveStatus::numerical_failure;
  double solve_time = 0.0;  // seconds
  // SDP variables; empty for the certainty-equivalence path.
  Matrix S, L, M;
  int iterations = 0;

  bool ok() const { return status == conic::SolveStatus::optimal; }
};

struct RegularizedOptions {
  conic::SolverSettings solver;
  /// Backend to use; the in-process interior-point solver when null.
  const conic::Backend* backend = nullptr;
};

/// Solves the regularized covariance-parameterized SDP and recovers
/// K = U0bar S Sigma^{-1}. Never throws on solver trouble: PE failure maps to
/// `infeasible`, backend trouble to the reported status. Throws
/// std::invalid_argument for lambda < 0 (the program is then unbounded).
LqrSolution solve_regularized(const SampleCov& cov, const PenaltyPair& penalties, double lambda,
                              const RegularizedOptions& options = {});

/// Certainty-equivalence design: least squares, then the DARE on the
/// estimate. Riccati non-convergence maps to numerical_failure and singular
/// Phi to infeasible.
LqrSolution ce_gain(const SampleCov& cov, const PenaltyPair& penalties);

}  // namespace covlqr
