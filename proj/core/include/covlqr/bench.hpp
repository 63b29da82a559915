#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covlqr/conic.hpp"
#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"

namespace covlqr::bench {

/// c / sqrt(t).
double lambda_schedule(Eigen::Index t, double c);

/// A regularization coefficient: either fixed or scheduled as c / sqrt(t).
struct LambdaSpec {
  enum class Kind { fixed, inv_sqrt_t };
  Kind kind = Kind::fixed;
  double value = 0.0;  // the coefficient, or c for the schedule

  static LambdaSpec fixed(double v) { return {Kind::fixed, v}; }
  static LambdaSpec inv_sqrt_t(double c) { return {Kind::inv_sqrt_t, c}; }
  double resolve(Eigen::Index t) const;
};

/// Parses "0.1" or "inv_sqrt_t:<c>". Throws ConfigError.
LambdaSpec parse_lambda(const std::string& text);

struct BenchConfig {
  SystemModel model = SystemModel::laplacian_benchmark();
  PenaltyPair penalties = PenaltyPair::laplacian_benchmark();
  Eigen::Index horizon = 20;
  std::vector<double> sigmas{0.1, 0.3, 0.7, 1.0};
  std::vector<LambdaSpec> lambdas{LambdaSpec::fixed(0.0), LambdaSpec::fixed(0.01),
                                  LambdaSpec::fixed(0.1), LambdaSpec::fixed(1.0),
                                  LambdaSpec::fixed(10.0)};
  long trials = 100;
  long figure_trials = 1000;
  double figure_sigma = 0.7;
  std::vector<LambdaSpec> figure_lambdas = default_figure_lambdas();
  std::uint64_t master_seed = 0;
  DataMode mode = DataMode::iid_pairs;
  std::filesystem::path out_dir = ".";
  std::string backend = "ipm";
  conic::SolverSettings solver;
  int workers = 0;  // 0: std::thread::hardware_concurrency()
  DecibelScale snr_scale = DecibelScale::amplitude;

  /// lambda = 0 followed by the 1-2-5 grid over [1e-3, 10].
  static std::vector<LambdaSpec> default_figure_lambdas();
  /// Throws ConfigError.
  void validate() const;
};

struct TrialRecord {
  long trial_index = 0;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  double lambda = 0.0;
  conic::SolveStatus status = conic::SolveStatus::numerical_failure;
  bool stabilizing = false;
  std::optional<double> gap;   // (C(K) - C*) / C*, present iff stabilizing
  double snr_db = 0.0;
  double closed_loop_radius = 0.0;  // rho(A + B K) on the true model; NaN without K
  double solve_time = 0.0;
};

struct CellSummary {
  double sigma = 0.0;
  double lambda = 0.0;
  long trials = 0;
  double stabilizing_percent = 0.0;  // S
  std::optional<double> median_gap;  // M, over stabilizing trials only
  double snr_db_lo = 0.0;
  double snr_db_hi = 0.0;
  double mean_solve_time = 0.0;
};

/// S and M of one (sigma, lambda) cell. Throws std::invalid_argument on an
/// empty list or mixed cells.
CellSummary summarize(std::span<const TrialRecord> records);

/// Median with linear interpolation between the middle pair.
double median(std::vector<double> values);

/// Stream master seed for noise level `sigma`; trials then use
/// trial_seed(cell_master_seed(master, sigma), index). The same (sigma, trial)
/// sees the same data for every lambda.
std::uint64_t cell_master_seed(std::uint64_t master_seed, double sigma);

/// Runs fn(i, worker) for i in [0, count) on `workers` threads (0: hardware
/// concurrency); `worker` is in [0, workers).
void parallel_for(long count, int workers, const std::function<void(long index, int worker)>& fn);

struct FigurePoint {
  double lambda = 0.0;
  CellSummary summary;
};

/// Monte Carlo harness over a fixed configuration. C* is computed once from
/// the true model.
class Harness {
 public:
  explicit Harness(BenchConfig config);

  const BenchConfig& config() const { return config_; }
  double optimal_cost() const { return optimal_cost_; }

  /// Never throws on solver failures; they come back as non-stabilizing.
  TrialRecord run_trial(double sigma, double lambda, long trial_index) const;
  std::vector<TrialRecord> run_cell(double sigma, double lambda, long trials) const;
  /// Serial execution, for checking the parallel path.
  std::vector<TrialRecord> run_cell_serial(double sigma, double lambda, long trials) const;

  /// All (sigma, lambda) cells of the configured grid, row-major in sigma.
  std::vector<CellSummary> table1() const;
  /// The lambda sweep at figure_sigma with figure_trials trials.
  std::vector<FigurePoint> figure1() const;

 private:
  TrialRecord run_trial_with(const conic::Backend& backend, double sigma, double lambda,
                             long trial_index) const;
  std::vector<std::unique_ptr<conic::Backend>> make_worker_backends() const;
  std::vector<CellSummary> run_grid(const std::vector<double>& sigmas,
                                    const std::vector<double>& lambdas, long trials) const;

  BenchConfig config_;
  double optimal_cost_ = 0.0;
};

/// Reads a JSON configuration; see README for the schema. Throws ConfigError.
BenchConfig load_config(const std::filesystem::path& path);
BenchConfig parse_config(const std::string& json_text);

// Reports.
void write_trials_csv(const std::filesystem::path& path, std::span<const TrialRecord> records);
void write_table1_csv(const std::filesystem::path& path, std::span<const CellSummary> cells);
/// Console table, one row per sigma; the best cell of each row (max S, then
/// min M) is wrapped in ANSI bold when `ansi` is set, else in asterisks.
std::string format_table1(std::span<const CellSummary> cells, bool ansi);
/// Index of the best cell within `row`.
std::size_t best_cell(std::span<const CellSummary> row);
void write_figure1_csv(const std::filesystem::path& path, std::span<const FigurePoint> points);
void write_figure1_svg(const std::filesystem::path& path, std::span<const FigurePoint> points,
                       double sigma);

}  // namespace covlqr::bench
