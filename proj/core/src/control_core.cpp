#include "covlqr/control_core.hpp"

#include <cmath>

#include "covlqr/errors.hpp"
#include "spd.hpp"

namespace covlqr {

namespace {

// Kronecker solves above this size switch to the doubling iteration.
constexpr Eigen::Index kMaxKroneckerDim = 50;

bool all_finite(const Matrix& M) { return M.allFinite(); }

Matrix dlyap_kronecker(const Matrix& F, const Matrix& W) {
  const Eigen::Index n = F.rows();
  const Eigen::Index nn = n * n;
  // vec(F X F^T) = (F (x) F) vec(X) with column-major vec.
  Matrix op = Matrix::Identity(nn, nn);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      op.block(i * n, j * n, n, n) -= F(i, j) * F;
    }
  }
  Eigen::PartialPivLU<Matrix> lu(op);
  if (!(lu.rcond() > 1e-14)) {
    throw IllConditioned("solve_dlyap: (I - F(x)F) is numerically singular for F " +
                         shape_string(F));
  }
  const Vector rhs = Eigen::Map<const Vector>(W.data(), nn);
  Vector x = lu.solve(rhs);
  x += lu.solve(rhs - op * x);  // one step of iterative refinement
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

// Smith doubling: X = sum_k F^k W F^kT, accumulated in 2^j-term chunks.
Matrix dlyap_doubling(const Matrix& F, const Matrix& W) {
  Matrix X = W;
  Matrix Fk = F;
  for (int iter = 0; iter < 200; ++iter) {
    Matrix next = X + Fk * X * Fk.transpose();
    const double change = (next - X).norm();
    X = std::move(next);
    Fk = Fk * Fk;
    if (change <= 1e-15 * (1.0 + X.norm())) return X;
  }
  throw NoConvergence("solve_dlyap: doubling iteration did not converge", 200);
}

}  // namespace

void SystemModel::validate() const {
  if (A.rows() != A.cols()) {
    throw DimensionMismatch("SystemModel: A must be square, got " + shape_string(A));
  }
  if (A.rows() == 0 || B.cols() == 0) {
    throw DimensionMismatch("SystemModel: n and m must be positive");
  }
  require_shape(B, A.rows(), B.cols(), "SystemModel::B");
  if (!all_finite(A) || !all_finite(B)) {
    throw std::invalid_argument("SystemModel: non-finite entries");
  }
}

SystemModel SystemModel::laplacian_benchmark() {
  SystemModel model;
  model.A.resize(3, 3);
  model.A << 1.01, 0.01, 0.00,
             0.01, 1.01, 0.01,
             0.00, 0.01, 1.01;
  model.B = Matrix::Identity(3, 3);
  return model;
}

void PenaltyPair::validate(Eigen::Index n, Eigen::Index m) const {
  require_shape(Q, n, n, "PenaltyPair::Q");
  require_shape(R, m, m, "PenaltyPair::R");
  if ((Q - Q.transpose()).norm() > 1e-12 * (1.0 + Q.norm()) ||
      (R - R.transpose()).norm() > 1e-12 * (1.0 + R.norm())) {
    throw std::invalid_argument("PenaltyPair: Q and R must be symmetric");
  }
  if (!(min_eigenvalue(Q) > 1e-12) || !(min_eigenvalue(R) > 1e-12)) {
    throw std::invalid_argument("PenaltyPair: Q and R must be positive definite");
  }
}

PenaltyPair PenaltyPair::laplacian_benchmark() {
  return PenaltyPair{Matrix::Identity(3, 3), 1e-3 * Matrix::Identity(3, 3)};
}

double spectral_radius(const Matrix& M) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("spectral_radius: matrix " + shape_string(M) + " is not square");
  }
  if (M.size() == 0) return 0.0;
  if (!all_finite(M)) {
    throw std::runtime_error("spectral_radius: non-finite entries in " + shape_string(M));
  }
  Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_radius: eigenvalue solver failed on " + shape_string(M));
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_stabilizing(const SystemModel& model, const Gain& K) {
  require_shape(K, model.m(), model.n(), "is_stabilizing: K");
  require_shape(model.B, model.n(), model.m(), "is_stabilizing: B");
  return spectral_radius(model.A + model.B * K) < 1.0;
}

SteadyCovariance solve_dlyap(const Matrix& F, const Matrix& W) {
  if (F.rows() != F.cols()) {
    throw DimensionMismatch("solve_dlyap: F " + shape_string(F) + " is not square");
  }
  require_shape(W, F.rows(), F.rows(), "solve_dlyap: W");
  const double rho = spectral_radius(F);
  if (!(rho < 1.0)) {
    throw NotStable("solve_dlyap: spectral radius " + std::to_string(rho) + " >= 1", rho);
  }
  const Matrix X = F.rows() <= kMaxKroneckerDim ? dlyap_kronecker(F, W) : dlyap_doubling(F, W);
  return symmetrize(X);
}

double lqr_cost(const SystemModel& model, const PenaltyPair& penalties, const Gain& K) {
  require_shape(K, model.m(), model.n(), "lqr_cost: K");
  const Matrix F = model.A + model.B * K;
  const Matrix Sigma = solve_dlyap(F, Matrix::Identity(model.n(), model.n()));
  return ((penalties.Q + K.transpose() * penalties.R * K) * Sigma).trace();
}

Matrix riccati_map(const SystemModel& model, const PenaltyPair& penalties, const Matrix& P) {
  const Matrix& A = model.A;
  const Matrix& B = model.B;
  const Matrix BtPA = B.transpose() * P * A;
  const Matrix gram = penalties.R + B.transpose() * P * B;
  const Eigen::LLT<Matrix> llt(symmetrize(gram));
  return symmetrize(penalties.Q + A.transpose() * P * A - BtPA.transpose() * llt.solve(BtPA));
}

DareSolution solve_dare(const SystemModel& model, const PenaltyPair& penalties,
                        const DareOptions& options) {
  model.validate();
  penalties.validate(model.n(), model.m());
  Matrix P = penalties.Q;
  const double blowup = 1e15 * (1.0 + penalties.Q.norm());
  long iter = 0;
  bool converged = false;
  while (iter < options.max_iterations) {
    Matrix next = riccati_map(model, penalties, P);
    ++iter;
    if (!all_finite(next) || next.norm() > blowup) {
      throw NoConvergence("solve_dare: Riccati iteration diverged (model not stabilizable?)", iter);
    }
    const double change = (next - P).norm();
    P = std::move(next);
    if (change <= options.tolerance * (1.0 + P.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw NoConvergence("solve_dare: no convergence after " + std::to_string(iter) + " iterations",
                        iter);
  }
  const Matrix& A = model.A;
  const Matrix& B = model.B;
  const Eigen::LLT<Matrix> llt(symmetrize(penalties.R + B.transpose() * P * B));
  Gain K = -llt.solve(B.transpose() * P * A);
  if (!is_stabilizing(model, K)) {
    throw NoConvergence("solve_dare: fixed point does not yield a stabilizing gain", iter);
  }
  return DareSolution{P, K, P.trace(), iter};
}

double regularized_cost(const Gain& K, const SteadyCovariance& Sigma, const Matrix& Phi,
                        const PenaltyPair& penalties, double lambda) {
  const Eigen::Index m = K.rows();
  const Eigen::Index n = K.cols();
  require_shape(Sigma, n, n, "regularized_cost: Sigma");
  require_shape(Phi, n + m, n + m, "regularized_cost: Phi");
  require_shape(penalties.Q, n, n, "regularized_cost: Q");
  require_shape(penalties.R, m, m, "regularized_cost: R");
  const auto llt = detail::factor_spd(Phi, "regularized_cost");
  const Matrix H = stack_gain(K);
  const Matrix moment = H * Sigma * H.transpose();
  Matrix weight = blkdiag(penalties.R, penalties.Q);
  if (lambda != 0.0) {
    weight += lambda * llt.solve(Matrix::Identity(n + m, n + m));
  }
  return (weight * moment).trace();
}

}  // namespace covlqr
