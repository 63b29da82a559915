#pragma once

#include <cstdint>
#include <random>

#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"
#include "covlqr/linalg.hpp"

namespace covlqr::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return dist_(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  Matrix gaussian(Eigen::Index rows, Eigen::Index cols) {
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal();
    return M;
  }

  Matrix symmetric(Eigen::Index d) { return symmetrize(gaussian(d, d)); }

  /// SPD with eigenvalues bounded below by `floor`.
  Matrix spd(Eigen::Index d, double floor = 0.1) {
    const Matrix G = gaussian(d, d);
    return G * G.transpose() / static_cast<double>(d) + floor * Matrix::Identity(d, d);
  }

  /// Random matrix rescaled to spectral radius `rho`.
  Matrix with_radius(Eigen::Index d, double rho) {
    Matrix F = gaussian(d, d);
    const double r = spectral_radius(F);
    return r > 0 ? Matrix(F * (rho / r)) : F;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> dist_;
};

/// Relative Frobenius distance with the denominator floored at 1.
inline double rel_fro(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

/// A benchmark-model sample covariance.
inline SampleCov benchmark_cov(double sigma, std::uint64_t seed, Eigen::Index t = 20) {
  return sample_covariances(
      generate_batch(SystemModel::laplacian_benchmark(), t, sigma, DataMode::iid_pairs, seed));
}

}  // namespace covlqr::testing
