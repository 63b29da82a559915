#pragma once

#include <Eigen/Dense>

#include <string>

namespace covlqr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Gain of the state feedback u = K x, shape m x n.
using Gain = Eigen::MatrixXd;

/// Steady-state covariance of the closed loop, symmetric n x n.
using SteadyCovariance = Eigen::MatrixXd;

inline Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

/// Block-diagonal [top 0; 0 bottom].
Matrix blkdiag(const Matrix& top, const Matrix& bottom);

/// The stacked matrix [K; I_n].
Matrix stack_gain(const Gain& K);

/// Smallest eigenvalue of the symmetric part of M.
double min_eigenvalue(const Matrix& M);

/// Throws DimensionMismatch unless M is rows x cols. `what` names the operand.
void require_shape(const Matrix& M, Eigen::Index rows, Eigen::Index cols, const std::string& what);

std::string shape_string(const Matrix& M);

}  // namespace covlqr
