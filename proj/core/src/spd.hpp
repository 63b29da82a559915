#pragma once

#include "covlqr/errors.hpp"
#include "covlqr/linalg.hpp"

namespace covlqr::detail {

// Reciprocal-condition floor below which a covariance is treated as singular.
inline constexpr double kSingularRcond = 1e-13;

// Cholesky factor of a sample covariance. Throws SingularPhi when the matrix
// is not numerically positive definite.
inline Eigen::LLT<Matrix> factor_spd(const Matrix& Phi, const char* what) {
  Eigen::LLT<Matrix> llt(symmetrize(Phi));
  if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
    throw SingularPhi(std::string(what) + ": sample covariance " + shape_string(Phi) +
                      " is not positive definite");
  }
  return llt;
}

}  // namespace covlqr::detail
