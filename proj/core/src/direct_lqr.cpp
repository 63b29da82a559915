#include "covlqr/direct_lqr.hpp"

#include <chrono>

#include "covlqr/errors.hpp"
#include "spd.hpp"

namespace covlqr {

PolicyParam parameterize(const SampleCov& cov, const Gain& K) {
  require_shape(K, cov.m(), cov.n(), "parameterize: K");
  const auto llt = detail::factor_spd(cov.Phi, "parameterize");
  return PolicyParam{llt.solve(stack_gain(K))};
}

Gain recover_gain(const SampleCov& cov, const PolicyParam& param) {
  require_shape(param.V, cov.n() + cov.m(), cov.n(), "recover_gain: V");
  return cov.U0bar * param.V;
}

double regularizer_omega(const PolicyParam& param, const SteadyCovariance& Sigma, const Matrix& Phi) {
  const Eigen::Index n = param.V.cols();
  require_shape(Sigma, n, n, "regularizer_omega: Sigma");
  require_shape(Phi, param.V.rows(), param.V.rows(), "regularizer_omega: Phi");
  return (param.V * Sigma * param.V.transpose() * Phi).trace();
}

double regularizer_indirect(const Gain& K, const SteadyCovariance& Sigma, const Matrix& Phi) {
  const Eigen::Index n = K.cols();
  const Eigen::Index d = K.rows() + n;
  require_shape(Sigma, n, n, "regularizer_indirect: Sigma");
  require_shape(Phi, d, d, "regularizer_indirect: Phi");
  const auto llt = detail::factor_spd(Phi, "regularizer_indirect");
  const Matrix H = stack_gain(K);
  return llt.solve(H * Sigma * H.transpose()).trace();
}

GParamBridge g_param_bridge(const DataBatch& batch, const PolicyParam& param,
                            const std::optional<SteadyCovariance>& Sigma) {
  const Eigen::Index n = batch.n();
  require_shape(param.V, batch.m() + n, n, "g_param_bridge: V");
  const Matrix D0 = batch.stacked_inputs_states();
  const double t = static_cast<double>(batch.t());
  const Matrix Phi = symmetrize(D0 * D0.transpose() / t);
  const Matrix Sig = Sigma.value_or(Matrix::Identity(n, n));

  GParamBridge out;
  out.G = D0.transpose() * param.V / t;
  const double lhs = (out.G * Sig * out.G.transpose()).trace();
  const double rhs = (param.V * Sig * param.V.transpose() * Phi).trace() / t;
  out.relation_gap = std::abs(lhs - rhs);
  out.reconstruction_gap = (D0 * out.G - Phi * param.V).norm();
  return out;
}

Matrix sigma_diff(const SampleCov& cov, const PolicyParam& param, const SteadyCovariance& Sigma) {
  const Eigen::Index n = cov.n();
  require_shape(param.V, n + cov.m(), n, "sigma_diff: V");
  require_shape(Sigma, n, n, "sigma_diff: Sigma");
  const Matrix Y = param.V * Sigma * param.V.transpose();
  const Matrix& W = cov.W0bar;
  const Matrix& X1 = cov.X1bar;
  const Matrix WY = W * Y;
  return WY * X1.transpose() + X1 * WY.transpose() - WY * W.transpose();
}

SigmaDiffTerms sigma_diff_terms(const SystemModel& model, const SampleCov& cov,
                                const PolicyParam& param, const SteadyCovariance& Sigma) {
  const Eigen::Index n = cov.n();
  const Eigen::Index m = cov.m();
  require_shape(model.A, n, n, "sigma_diff_expanded: A");
  require_shape(model.B, n, m, "sigma_diff_expanded: B");
  require_shape(param.V, n + m, n, "sigma_diff_expanded: V");
  Matrix BA(n, m + n);
  BA << model.B, model.A;
  const Matrix Y = param.V * Sigma * param.V.transpose();
  const Matrix& W = cov.W0bar;
  const Matrix cross_half = W * Y * cov.Phi * BA.transpose();
  SigmaDiffTerms terms;
  terms.quadratic = W * Y * W.transpose();
  terms.cross = cross_half + cross_half.transpose();
  return terms;
}

Matrix sigma_diff_expanded(const SystemModel& model, const SampleCov& cov,
                           const PolicyParam& param, const SteadyCovariance& Sigma) {
  return sigma_diff_terms(model, cov, param, Sigma).total();
}

LqrSolution solve_regularized(const SampleCov& cov, const PenaltyPair& penalties, double lambda,
                              const RegularizedOptions& options) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("solve_regularized: lambda must be >= 0 (negative values make the "
                                "program unbounded below)");
  }
  penalties.validate(cov.n(), cov.m());
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  LqrSolution sol;
  try {
    (void)detail::factor_spd(cov.Phi, "solve_regularized");
  } catch (const SingularPhi&) {
    sol.status = conic::SolveStatus::infeasible;
    sol.solve_time = elapsed();
    return sol;
  }

  // At lambda = 0 M carries no cost and is unbounded above, so its block is
  // left out of the program.
  conic::AssembleOptions assemble_opts;
  assemble_opts.include_m_block = lambda > 0.0;
  const conic::ConicProgram prog = conic::assemble(cov, penalties, lambda, assemble_opts);

  conic::SolveReport report;
  if (options.backend != nullptr) {
    report = options.backend->solve(prog);
  } else {
    report = conic::InteriorPointBackend(options.solver).solve(prog);
  }
  sol.status = report.status;
  sol.iterations = report.iterations;
  sol.objective = report.objective;
  if (report.status == conic::SolveStatus::optimal) {
    sol.Sigma = report.values.at("Sigma");
    sol.S = report.values.at("S");
    sol.L = report.values.at("L");
    if (const auto it = report.values.find("M"); it != report.values.end()) sol.M = it->second;
    // Sigma K^T = (U0bar S)^T.
    const Eigen::LLT<Matrix> llt(symmetrize(sol.Sigma));
    if (llt.info() != Eigen::Success) {
      sol.status = conic::SolveStatus::numerical_failure;
    } else {
      sol.K = llt.solve((cov.U0bar * sol.S).transpose()).transpose();
      if (!sol.K.allFinite()) sol.status = conic::SolveStatus::numerical_failure;
    }
  }
  sol.solve_time = elapsed();
  return sol;
}

LqrSolution ce_gain(const SampleCov& cov, const PenaltyPair& penalties) {
  const auto start = std::chrono::steady_clock::now();
  LqrSolution sol;
  try {
    const Estimate est = least_squares(cov);
    const SystemModel model = est.model();
    const DareSolution dare = solve_dare(model, penalties);
    sol.K = dare.K;
    sol.Sigma = solve_dlyap(model.A + model.B * dare.K, Matrix::Identity(model.n(), model.n()));
    sol.objective = ((penalties.Q + dare.K.transpose() * penalties.R * dare.K) * sol.Sigma).trace();
    sol.iterations = static_cast<int>(std::min<long>(dare.iterations, 1 << 30));
    sol.status = conic::SolveStatus::optimal;
  } catch (const SingularPhi&) {
    sol.status = conic::SolveStatus::infeasible;
  } catch (const NoConvergence&) {
    sol.status = conic::SolveStatus::numerical_failure;
  } catch (const NotStable&) {
    sol.status = conic::SolveStatus::numerical_failure;
  } catch (const IllConditioned&) {
    sol.status = conic::SolveStatus::numerical_failure;
  }
  sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace covlqr
