#pragma once

#include <cstdint>
#include <optional>

#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"

namespace covlqr {

/// Ordinary least-squares estimate [B_hat, A_hat] = X1bar Phi^{-1}.
struct Estimate {
  Matrix A_hat;  // n x n
  Matrix B_hat;  // n x m
  /// ||X1 - [B_hat, A_hat] D0||_F; only available when raw data was given.
  std::optional<double> residual;

  SystemModel model() const { return SystemModel{A_hat, B_hat}; }
  /// [B_hat, A_hat], n x (m+n).
  Matrix stacked() const;
};

/// Throws SingularPhi when persistency of excitation fails.
Estimate least_squares(const SampleCov& cov);
Estimate least_squares(const DataBatch& batch);

/// Phi^{-1} / t, the row-wise covariance of [B_hat - B, A_hat - A] under
/// unit noise.
Matrix estimator_covariance(const SampleCov& cov);

struct Lemma1Moments {
  double mean_norm = 0.0;  // max_ij |mean(W0bar)_ij|
  double var_error = 0.0;  // ||Cov_emp[vec W0bar] - predicted||_F
  double relative_var_error = 0.0;  // var_error / ||predicted||_F (0 when predicted = 0)
  Matrix empirical_cov;
  Matrix predicted_cov;    // sigma^2 (Phi_t (x) I_n) / t in column-major vec
};

/// Monte Carlo check of E[W0bar] = 0 and Var[vec W0bar] = sigma^2 Phi_t/t
/// over `n_seeds` iid_pairs batches, with Phi_t = I_{m+n}. Seeds are
/// trial_seed(master_seed, k).
Lemma1Moments lemma1_moments(const SystemModel& model, Eigen::Index t, double sigma, long n_seeds,
                             std::uint64_t master_seed = 0);

}  // namespace covlqr
