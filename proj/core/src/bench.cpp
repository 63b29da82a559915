#include "covlqr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "covlqr/direct_lqr.hpp"
#include "covlqr/errors.hpp"

namespace covlqr::bench {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

double lambda_schedule(Eigen::Index t, double c) {
  if (t < 1) throw std::invalid_argument("lambda_schedule: t must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("lambda_schedule: c must be > 0");
  return c / std::sqrt(static_cast<double>(t));
}

double LambdaSpec::resolve(Eigen::Index t) const {
  return kind == Kind::fixed ? value : lambda_schedule(t, value);
}

LambdaSpec parse_lambda(const std::string& text) {
  const std::string prefix = "inv_sqrt_t:";
  try {
    std::size_t used = 0;
    if (text.rfind(prefix, 0) == 0) {
      const std::string rest = text.substr(prefix.size());
      const double c = std::stod(rest, &used);
      if (used != rest.size() || !(c > 0.0)) throw std::invalid_argument(rest);
      return LambdaSpec::inv_sqrt_t(c);
    }
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    if (!(v >= 0.0)) throw ConfigError("lambda must be >= 0, got " + text);
    return LambdaSpec::fixed(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("invalid lambda '" + text + "' (expected a number or inv_sqrt_t:<c>)");
  }
}

std::vector<LambdaSpec> BenchConfig::default_figure_lambdas() {
  std::vector<LambdaSpec> grid{LambdaSpec::fixed(0.0)};
  for (double decade = 1e-3; decade < 10.0 * 1.0001; decade *= 10.0) {
    for (double mult : {1.0, 2.0, 5.0}) {
      const double v = decade * mult;
      if (v > 10.0 * 1.0001) break;
      grid.push_back(LambdaSpec::fixed(v));
    }
  }
  return grid;
}

void BenchConfig::validate() const {
  try {
    model.validate();
    penalties.validate(model.n(), model.m());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid model or penalties: ") + e.what());
  }
  if (trials < 1 || figure_trials < 1) throw ConfigError("trials must be >= 1");
  if (horizon < model.n() + model.m()) {
    throw ConfigError("t = " + std::to_string(horizon) + " is below m + n = " +
                      std::to_string(model.n() + model.m()) + "; data cannot be exciting");
  }
  auto check_sigma = [](double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("sigma must be finite and >= 0");
  };
  for (double s : sigmas) check_sigma(s);
  check_sigma(figure_sigma);
  auto check_lambdas = [](const std::vector<LambdaSpec>& list) {
    for (const auto& l : list) {
      if (!(l.value >= 0.0) || !std::isfinite(l.value)) throw ConfigError("lambda must be >= 0");
      if (l.kind == LambdaSpec::Kind::inv_sqrt_t && !(l.value > 0.0)) {
        throw ConfigError("inv_sqrt_t schedule needs c > 0");
      }
    }
  };
  check_lambdas(lambdas);
  check_lambdas(figure_lambdas);
  if (sigmas.empty() || lambdas.empty() || figure_lambdas.empty()) {
    throw ConfigError("sigma and lambda lists must be non-empty");
  }
  (void)conic::make_backend(backend, solver);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

CellSummary summarize(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  CellSummary out;
  out.sigma = records.front().sigma;
  out.lambda = records.front().lambda;
  out.trials = static_cast<long>(records.size());
  std::vector<double> gaps;
  long stabilizing = 0;
  double time_sum = 0.0;
  out.snr_db_lo = std::numeric_limits<double>::infinity();
  out.snr_db_hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    if (r.sigma != out.sigma || r.lambda != out.lambda) {
      throw std::invalid_argument("summarize: records from different cells");
    }
    if (r.stabilizing) {
      ++stabilizing;
      if (r.gap) gaps.push_back(*r.gap);
    }
    time_sum += r.solve_time;
    out.snr_db_lo = std::min(out.snr_db_lo, r.snr_db);
    out.snr_db_hi = std::max(out.snr_db_hi, r.snr_db);
  }
  out.stabilizing_percent = 100.0 * static_cast<double>(stabilizing) / static_cast<double>(out.trials);
  if (!gaps.empty()) out.median_gap = median(std::move(gaps));
  out.mean_solve_time = time_sum / static_cast<double>(out.trials);
  return out;
}

std::uint64_t cell_master_seed(std::uint64_t master_seed, double sigma) {
  return master_seed ^ splitmix64(std::bit_cast<std::uint64_t>(sigma));
}

void parallel_for(long count, int workers, const std::function<void(long, int)>& fn) {
  const int nthreads = static_cast<int>(
      std::min<long>(resolve_workers(workers), std::max<long>(count, 1)));
  if (nthreads <= 1) {
    for (long i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i, w);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Harness::Harness(BenchConfig config) : config_(std::move(config)) {
  config_.validate();
  optimal_cost_ = solve_dare(config_.model, config_.penalties).cost;
}

TrialRecord Harness::run_trial(double sigma, double lambda, long trial_index) const {
  const auto backend = conic::make_backend(config_.backend, config_.solver);
  return run_trial_with(*backend, sigma, lambda, trial_index);
}

TrialRecord Harness::run_trial_with(const conic::Backend& backend, double sigma, double lambda,
                                    long trial_index) const {
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.sigma = sigma;
  rec.lambda = lambda;
  rec.seed = trial_seed(cell_master_seed(config_.master_seed, sigma),
                        static_cast<std::uint64_t>(trial_index));
  rec.closed_loop_radius = std::numeric_limits<double>::quiet_NaN();

  const DataBatch batch = generate_batch(config_.model, config_.horizon, sigma, config_.mode, rec.seed);
  rec.snr_db = snr_estimate(batch, NoiseNorm::spectral, config_.snr_scale);
  const SampleCov cov = sample_covariances(batch);

  RegularizedOptions opts;
  opts.backend = &backend;
  const LqrSolution sol = solve_regularized(cov, config_.penalties, lambda, opts);
  rec.status = sol.status;
  rec.solve_time = sol.solve_time;
  if (!sol.ok()) return rec;

  const Matrix closed = config_.model.A + config_.model.B * sol.K;
  rec.closed_loop_radius = spectral_radius(closed);
  if (!(rec.closed_loop_radius < 1.0)) return rec;
  try {
    const double cost = lqr_cost(config_.model, config_.penalties, sol.K);
    rec.stabilizing = true;
    rec.gap = (cost - optimal_cost_) / optimal_cost_;
  } catch (const IllConditioned&) {
    // rho within rounding of 1: no usable steady-state cost, counted as not
    // stabilizing.
  }
  return rec;
}

std::vector<TrialRecord> Harness::run_cell(double sigma, double lambda, long trials) const {
  std::vector<TrialRecord> out(trials);
  const auto backends = make_worker_backends();
  parallel_for(trials, config_.workers, [&](long i, int worker) {
    out[i] = run_trial_with(*backends[worker], sigma, lambda, i);
  });
  return out;
}

std::vector<std::unique_ptr<conic::Backend>> Harness::make_worker_backends() const {
  std::vector<std::unique_ptr<conic::Backend>> backends;
  const int workers = resolve_workers(config_.workers);
  for (int w = 0; w < workers; ++w) {
    backends.push_back(conic::make_backend(config_.backend, config_.solver));
  }
  return backends;
}

std::vector<TrialRecord> Harness::run_cell_serial(double sigma, double lambda, long trials) const {
  const auto backend = conic::make_backend(config_.backend, config_.solver);
  std::vector<TrialRecord> out;
  out.reserve(trials);
  for (long i = 0; i < trials; ++i) out.push_back(run_trial_with(*backend, sigma, lambda, i));
  return out;
}

std::vector<CellSummary> Harness::run_grid(const std::vector<double>& sigmas,
                                           const std::vector<double>& lambdas, long trials) const {
  const long ncells = static_cast<long>(sigmas.size() * lambdas.size());
  std::vector<TrialRecord> records(ncells * trials);
  const auto backends = make_worker_backends();
  parallel_for(ncells * trials, config_.workers, [&](long job, int worker) {
    const long cell = job / trials;
    const long trial = job % trials;
    const double sigma = sigmas[cell / lambdas.size()];
    const double lambda = lambdas[cell % lambdas.size()];
    records[job] = run_trial_with(*backends[worker], sigma, lambda, trial);
  });
  std::vector<CellSummary> cells;
  cells.reserve(ncells);
  for (long cell = 0; cell < ncells; ++cell) {
    cells.push_back(summarize(std::span(records).subspan(cell * trials, trials)));
  }
  return cells;
}

std::vector<CellSummary> Harness::table1() const {
  std::vector<double> lambdas;
  for (const auto& l : config_.lambdas) lambdas.push_back(l.resolve(config_.horizon));
  return run_grid(config_.sigmas, lambdas, config_.trials);
}

std::vector<FigurePoint> Harness::figure1() const {
  std::vector<double> lambdas;
  for (const auto& l : config_.figure_lambdas) lambdas.push_back(l.resolve(config_.horizon));
  const auto cells = run_grid({config_.figure_sigma}, lambdas, config_.figure_trials);
  std::vector<FigurePoint> points;
  for (const auto& c : cells) points.push_back(FigurePoint{c.lambda, c});
  return points;
}

}  // namespace covlqr::bench
