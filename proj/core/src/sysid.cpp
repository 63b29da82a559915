#include "covlqr/sysid.hpp"

#include "covlqr/errors.hpp"
#include "spd.hpp"

namespace covlqr {

Matrix Estimate::stacked() const {
  Matrix Theta(A_hat.rows(), B_hat.cols() + A_hat.cols());
  Theta << B_hat, A_hat;
  return Theta;
}

Estimate least_squares(const SampleCov& cov) {
  const Eigen::Index n = cov.n();
  const Eigen::Index m = cov.m();
  const auto llt = detail::factor_spd(cov.Phi, "least_squares");
  // Theta Phi = X1bar  <=>  Phi Theta^T = X1bar^T.
  const Matrix Theta = llt.solve(cov.X1bar.transpose()).transpose();
  Estimate est;
  est.B_hat = Theta.leftCols(m);
  est.A_hat = Theta.rightCols(n);
  return est;
}

Estimate least_squares(const DataBatch& batch) {
  Estimate est = least_squares(sample_covariances(batch));
  est.residual = (batch.X1 - est.stacked() * batch.stacked_inputs_states()).norm();
  return est;
}

Matrix estimator_covariance(const SampleCov& cov) {
  const auto llt = detail::factor_spd(cov.Phi, "estimator_covariance");
  const Eigen::Index d = cov.Phi.rows();
  return symmetrize(llt.solve(Matrix::Identity(d, d))) / static_cast<double>(cov.t);
}

Lemma1Moments lemma1_moments(const SystemModel& model, Eigen::Index t, double sigma, long n_seeds,
                             std::uint64_t master_seed) {
  model.validate();
  if (n_seeds < 2) throw std::invalid_argument("lemma1_moments: need at least 2 seeds");
  const Eigen::Index n = model.n();
  const Eigen::Index d = model.m() + n;
  const Eigen::Index len = n * d;

  Vector sum = Vector::Zero(len);
  Matrix sum_outer = Matrix::Zero(len, len);
  for (long k = 0; k < n_seeds; ++k) {
    const DataBatch batch =
        generate_batch(model, t, sigma, DataMode::iid_pairs, trial_seed(master_seed, k));
    const Matrix W0bar = sample_covariances(batch).W0bar;
    const Eigen::Map<const Vector> v(W0bar.data(), len);
    sum += v;
    sum_outer.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }
  const double count = static_cast<double>(n_seeds);
  const Vector mean = sum / count;
  Matrix outer = sum_outer.selfadjointView<Eigen::Lower>();
  const Matrix emp = (outer - count * mean * mean.transpose()) / (count - 1.0);

  Lemma1Moments out;
  out.mean_norm = mean.cwiseAbs().maxCoeff();
  // vec(w phi^T) = phi (x) w, so Var = E[phi phi^T] (x) E[w w^T] / t.
  out.predicted_cov = (sigma * sigma / static_cast<double>(t)) * Matrix::Identity(len, len);
  out.empirical_cov = emp;
  out.var_error = (emp - out.predicted_cov).norm();
  const double scale = out.predicted_cov.norm();
  out.relative_var_error = scale > 0.0 ? out.var_error / scale : 0.0;
  return out;
}

}  // namespace covlqr
