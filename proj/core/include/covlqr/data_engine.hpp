#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "covlqr/control_core.hpp"
#include "covlqr/linalg.hpp"

namespace covlqr {

enum class DataMode {
  /// Every column draws an independent x ~ N(0, I), u ~ N(0, I), w ~ N(0, s^2 I).
  iid_pairs,
  /// One trajectory from x_0 ~ N(0, I) with fresh u, w at every step.
  trajectory,
};

std::string_view to_string(DataMode mode);
/// Accepts "iid_pairs" and "trajectory"; throws ConfigError otherwise.
DataMode parse_data_mode(std::string_view text);

/// Raw data matrices of a length-t experiment, with X1 = A X0 + B U0 + W0.
struct DataBatch {
  Matrix X0;  // n x t
  Matrix U0;  // m x t
  Matrix W0;  // n x t, zero when unknown
  Matrix X1;  // n x t
  DataMode mode = DataMode::iid_pairs;
  /// False for externally supplied data, where W0 is not observed.
  bool noise_known = true;

  Eigen::Index t() const { return X0.cols(); }
  Eigen::Index n() const { return X0.rows(); }
  Eigen::Index m() const { return U0.rows(); }

  /// D0 = [U0; X0].
  Matrix stacked_inputs_states() const;

  void validate() const;
};

/// Sample covariances of a batch, all normalized by t.
struct SampleCov {
  Matrix Phi;     // D0 D0^T / t, (m+n) x (m+n)
  Matrix X0bar;   // X0 D0^T / t, n x (m+n)
  Matrix U0bar;   // U0 D0^T / t, m x (m+n)
  Matrix W0bar;   // W0 D0^T / t, n x (m+n)
  Matrix X1bar;   // X1 D0^T / t, n x (m+n)
  Eigen::Index t = 0;

  Eigen::Index n() const { return X0bar.rows(); }
  Eigen::Index m() const { return U0bar.rows(); }
};

/// Stream seed of trial `trial_index`: master XOR (index * 0x9E3779B97F4A7C15).
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

/// Simulates t columns of data. Deterministic in `seed`.
DataBatch generate_batch(const SystemModel& model, Eigen::Index t, double sigma, DataMode mode,
                         std::uint64_t seed);

SampleCov sample_covariances(const DataBatch& batch);

struct PeResult {
  bool satisfied = false;
  double sigma_min = 0.0;  // (m+n)-th singular value of D0, 0 if t < m+n
  double sigma_max = 0.0;
};

/// Persistency of excitation: rank(D0) = m + n, judged as
/// sigma_{m+n}(D0) > 1e-8 max(1, sigma_max(D0)).
PeResult pe_check(const DataBatch& batch);

enum class NoiseNorm { spectral, frobenius };

/// Decibel conversion of an amplitude ratio r: 20 log10 r (amplitude) or
/// 10 log10 r (power).
enum class DecibelScale { amplitude, power };

/// sigma_min(D0) / ||W0|| in decibels. Returns +infinity when W0 = 0.
/// Throws std::invalid_argument when the batch has no known noise.
double snr_estimate(const DataBatch& batch, NoiseNorm norm = NoiseNorm::spectral,
                    DecibelScale scale = DecibelScale::amplitude);

// CSV interchange. A matrix file is
//
//   matrix,rows,cols
//   <name>,<rows>,<cols>
//   <column 0 entries, comma separated>
//   ...
//   <column cols-1 entries>
//
// i.e. one line per column (column-major). Values round-trip exactly.
void write_matrix_csv(const std::filesystem::path& path, std::string_view name, const Matrix& M);
Matrix read_matrix_csv(const std::filesystem::path& path, std::string* name = nullptr);

/// Writes X0.csv, U0.csv, W0.csv (only if noise_known) and X1.csv into `dir`.
void export_batch(const DataBatch& batch, const std::filesystem::path& dir);
/// Reads a directory written by export_batch, or any directory holding
/// X0/U0/X1 files. A missing W0.csv yields noise_known = false.
DataBatch import_batch(const std::filesystem::path& dir);

}  // namespace covlqr
