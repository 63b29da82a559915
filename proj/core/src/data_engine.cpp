#include "covlqr/data_engine.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "covlqr/errors.hpp"

namespace covlqr {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }
  void fill(Eigen::Ref<Vector> v, double scale) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * dist_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace

std::string_view to_string(DataMode mode) {
  switch (mode) {
    case DataMode::iid_pairs:
      return "iid_pairs";
    case DataMode::trajectory:
      return "trajectory";
  }
  return "unknown";
}

DataMode parse_data_mode(std::string_view text) {
  if (text == "iid_pairs" || text == "iid") return DataMode::iid_pairs;
  if (text == "trajectory") return DataMode::trajectory;
  throw ConfigError("unknown data mode '" + std::string(text) +
                    "' (expected iid_pairs or trajectory)");
}

Matrix DataBatch::stacked_inputs_states() const {
  Matrix D0(m() + n(), t());
  D0.topRows(m()) = U0;
  D0.bottomRows(n()) = X0;
  return D0;
}

void DataBatch::validate() const {
  const Eigen::Index cols = X0.cols();
  require_shape(U0, U0.rows(), cols, "DataBatch::U0");
  require_shape(W0, X0.rows(), cols, "DataBatch::W0");
  require_shape(X1, X0.rows(), cols, "DataBatch::X1");
  if (cols == 0) throw DimensionMismatch("DataBatch: no columns");
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return master_seed ^ (trial_index * kGoldenGamma);
}

DataBatch generate_batch(const SystemModel& model, Eigen::Index t, double sigma, DataMode mode,
                         std::uint64_t seed) {
  model.validate();
  if (t < 1) throw std::invalid_argument("generate_batch: t must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("generate_batch: sigma must be >= 0");
  const Eigen::Index n = model.n();
  const Eigen::Index m = model.m();

  DataBatch batch;
  batch.mode = mode;
  batch.X0.resize(n, t);
  batch.U0.resize(m, t);
  batch.W0.resize(n, t);
  batch.X1.resize(n, t);

  NormalStream normal(seed);
  Vector x(n);
  if (mode == DataMode::trajectory) normal.fill(x, 1.0);
  for (Eigen::Index k = 0; k < t; ++k) {
    if (mode == DataMode::iid_pairs) normal.fill(batch.X0.col(k), 1.0);
    else batch.X0.col(k) = x;
    normal.fill(batch.U0.col(k), 1.0);
    normal.fill(batch.W0.col(k), sigma);
    batch.X1.col(k) = model.A * batch.X0.col(k) + model.B * batch.U0.col(k) + batch.W0.col(k);
    x = batch.X1.col(k);
  }
  return batch;
}

SampleCov sample_covariances(const DataBatch& batch) {
  batch.validate();
  const Matrix D0 = batch.stacked_inputs_states();
  const Matrix D0t = D0.transpose() / static_cast<double>(batch.t());
  SampleCov cov;
  cov.t = batch.t();
  cov.Phi = symmetrize(D0 * D0t);
  cov.X0bar = batch.X0 * D0t;
  cov.U0bar = batch.U0 * D0t;
  cov.W0bar = batch.W0 * D0t;
  cov.X1bar = batch.X1 * D0t;
  return cov;
}

PeResult pe_check(const DataBatch& batch) {
  batch.validate();
  const Matrix D0 = batch.stacked_inputs_states();
  const Eigen::Index rows = D0.rows();
  Eigen::JacobiSVD<Matrix> svd(D0);
  const Vector& sv = svd.singularValues();
  PeResult result;
  result.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  if (D0.cols() < rows) return result;
  result.sigma_min = sv[rows - 1];
  result.satisfied = result.sigma_min > 1e-8 * std::max(1.0, result.sigma_max);
  return result;
}

double snr_estimate(const DataBatch& batch, NoiseNorm norm, DecibelScale scale) {
  if (!batch.noise_known) {
    throw std::invalid_argument("snr_estimate: batch carries no noise record");
  }
  const double smin = pe_check(batch).sigma_min;
  double wnorm = 0.0;
  if (norm == NoiseNorm::frobenius) {
    wnorm = batch.W0.norm();
  } else if (batch.W0.size() > 0) {
    wnorm = Eigen::JacobiSVD<Matrix>(batch.W0).singularValues()[0];
  }
  if (wnorm == 0.0) return std::numeric_limits<double>::infinity();
  const double factor = scale == DecibelScale::amplitude ? 20.0 : 10.0;
  return factor * std::log10(smin / wnorm);
}

}  // namespace covlqr
