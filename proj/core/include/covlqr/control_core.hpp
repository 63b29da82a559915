#pragma once

#include "covlqr/linalg.hpp"

namespace covlqr {

/// Linear system x+ = A x + B u + w.
struct SystemModel {
  Matrix A;  // n x n
  Matrix B;  // n x m

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }

  /// Throws DimensionMismatch / std::invalid_argument on bad shapes or
  /// non-finite entries.
  void validate() const;

  /// The marginally unstable 3-state Laplacian system with A tridiagonal
  /// (1.01 diagonal, 0.01 off-diagonal) and B = I_3.
  static SystemModel laplacian_benchmark();
};

/// State and input weights of the quadratic cost, both positive definite.
struct PenaltyPair {
  Matrix Q;  // n x n
  Matrix R;  // m x m

  void validate(Eigen::Index n, Eigen::Index m) const;

  /// Q = I_3, R = 1e-3 I_3.
  static PenaltyPair laplacian_benchmark();
};

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& M);

/// True iff rho(A + B K) < 1, strictly.
bool is_stabilizing(const SystemModel& model, const Gain& K);

/// Solves Sigma = W + F Sigma F^T by Kronecker vectorization.
///
/// Throws NotStable when rho(F) >= 1 and IllConditioned when the
/// vectorized operator (I - F (x) F) is numerically singular. The result is
/// symmetrized.
SteadyCovariance solve_dlyap(const Matrix& F, const Matrix& W);

/// Average LQR cost Tr((Q + K^T R K) Sigma) of u = K x under unit process
/// noise. Throws NotStable if K does not stabilize the model.
double lqr_cost(const SystemModel& model, const PenaltyPair& penalties, const Gain& K);

struct DareOptions {
  double tolerance = 1e-12;    // on ||P_{k+1} - P_k||_F, relative to 1 + ||P||_F
  long max_iterations = 1'000'000;
};

struct DareSolution {
  Matrix P;       // stabilizing fixed point of the Riccati map
  Gain K;         // -(R + B^T P B)^{-1} B^T P A
  double cost;    // Tr(P)
  long iterations;
};

/// One application of the Riccati map
/// P -> Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A.
Matrix riccati_map(const SystemModel& model, const PenaltyPair& penalties, const Matrix& P);

/// Stabilizing DARE solution by value iteration from P = Q.
/// Throws NoConvergence when the iteration diverges or hits the cap, which
/// is how a non-stabilizable model shows up.
DareSolution solve_dare(const SystemModel& model, const PenaltyPair& penalties,
                        const DareOptions& options = {});

/// Tr((blkdiag(R, Q) + lambda Phi^{-1}) [K; I] Sigma [K; I]^T).
///
/// Any real lambda is accepted, including negative values. Throws
/// SingularPhi if Phi is not positive definite.
double regularized_cost(const Gain& K, const SteadyCovariance& Sigma, const Matrix& Phi,
                        const PenaltyPair& penalties, double lambda);

}  // namespace covlqr
