#include "covlqr/linalg.hpp"

#include "covlqr/errors.hpp"

namespace covlqr {

Matrix blkdiag(const Matrix& top, const Matrix& bottom) {
  Matrix out = Matrix::Zero(top.rows() + bottom.rows(), top.cols() + bottom.cols());
  out.topLeftCorner(top.rows(), top.cols()) = top;
  out.bottomRightCorner(bottom.rows(), bottom.cols()) = bottom;
  return out;
}

Matrix stack_gain(const Gain& K) {
  const Eigen::Index m = K.rows();
  const Eigen::Index n = K.cols();
  Matrix H(m + n, n);
  H.topRows(m) = K;
  H.bottomRows(n).setIdentity();
  return H;
}

double min_eigenvalue(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::string shape_string(const Matrix& M) {
  return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

void require_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (M.rows() != rows || M.cols() != cols) {
    throw DimensionMismatch(what + " has shape " + shape_string(M) + ", expected " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace covlqr
