// covlqr: command-line front end for the data-driven LQR benchmark.
//
// Exit codes: 0 success, 2 configuration error, 3 solver-stack failure.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "covlqr/bench.hpp"
#include "covlqr/conic.hpp"
#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"
#include "covlqr/direct_lqr.hpp"
#include "covlqr/errors.hpp"
#include "covlqr/sdpa.hpp"
#include "covlqr/sysid.hpp"

namespace {

using namespace covlqr;
using bench::BenchConfig;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long> trials;
  std::vector<double> sigmas;
  std::vector<std::string> lambdas;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::optional<long> horizon;
  std::optional<int> workers;
  std::optional<std::string> backend;
  std::optional<std::string> snr_scale;
};

void add_common(CLI::App& sub, CommonFlags& f) {
  sub.add_option("-c,--config", f.config_path, "JSON configuration file");
  sub.add_option("--seed", f.seed, "master seed (falls back to $COVLQR_SEED, then the config)");
  sub.add_option("--trials", f.trials, "Monte Carlo trials per cell");
  sub.add_option("--sigma", f.sigmas, "noise level(s)")->delimiter(',');
  sub.add_option("--lambda", f.lambdas, "regularization coefficient(s), or inv_sqrt_t:<c>")
      ->delimiter(',');
  sub.add_option("--mode", f.mode, "data mode: iid or trajectory");
  sub.add_option("--out", f.out, "output directory");
  sub.add_option("-t,--horizon", f.horizon, "number of samples t");
  sub.add_option("--workers", f.workers, "worker threads (0: all cores)");
  sub.add_option("--backend", f.backend, "conic solver backend");
  sub.add_option("--snr-scale", f.snr_scale, "SNR decibels: amplitude (20 log10) or power (10 log10)");
}

std::optional<std::uint64_t> env_seed() {
  const char* v = std::getenv("COVLQR_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long s = std::stoull(v, &used, 0);
    if (used != std::string(v).size()) throw std::invalid_argument(v);
    return s;
  } catch (const std::exception&) {
    throw ConfigError(std::string("COVLQR_SEED is not an unsigned integer: ") + v);
  }
}

// Which list a --trials/--sigma/--lambda override targets.
enum class Target { table, figure };

BenchConfig build_config(const CommonFlags& f, Target target) {
  BenchConfig cfg = f.config_path.empty() ? BenchConfig{} : bench::load_config(f.config_path);
  if (f.seed) cfg.master_seed = *f.seed;
  else if (auto s = env_seed()) cfg.master_seed = *s;
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.mode) cfg.mode = parse_data_mode(*f.mode);
  if (f.out) cfg.out_dir = *f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.backend) cfg.backend = *f.backend;
  if (f.snr_scale) {
    if (*f.snr_scale == "amplitude") cfg.snr_scale = DecibelScale::amplitude;
    else if (*f.snr_scale == "power") cfg.snr_scale = DecibelScale::power;
    else throw ConfigError("--snr-scale must be amplitude or power");
  }
  std::vector<bench::LambdaSpec> lambdas;
  for (const auto& l : f.lambdas) lambdas.push_back(bench::parse_lambda(l));
  if (target == Target::table) {
    if (f.trials) cfg.trials = *f.trials;
    if (!f.sigmas.empty()) cfg.sigmas = f.sigmas;
    if (!lambdas.empty()) cfg.lambdas = lambdas;
  } else {
    if (f.trials) cfg.figure_trials = *f.trials;
    if (f.sigmas.size() > 1) throw ConfigError("figure1 takes a single --sigma");
    if (!f.sigmas.empty()) cfg.figure_sigma = f.sigmas.front();
    if (!lambdas.empty()) cfg.figure_lambdas = lambdas;
  }
  cfg.validate();
  return cfg;
}

double first_sigma(const BenchConfig& cfg) { return cfg.sigmas.front(); }
double first_lambda(const BenchConfig& cfg) { return cfg.lambdas.front().resolve(cfg.horizon); }

void print_matrix(const char* name, const Matrix& M) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
  std::cout << name << " =\n" << M.format(fmt) << '\n';
}

// simulate: one batch written as CSV files.
int cmd_simulate(const CommonFlags& f) {
  const BenchConfig cfg = build_config(f, Target::table);
  const double sigma = first_sigma(cfg);
  const DataBatch batch = generate_batch(cfg.model, cfg.horizon, sigma, cfg.mode, cfg.master_seed);
  export_batch(batch, cfg.out_dir);
  const PeResult pe = pe_check(batch);
  std::printf("wrote %s/{X0,U0,W0,X1}.csv  t=%ld sigma=%g mode=%s seed=%llu\n",
              cfg.out_dir.string().c_str(), static_cast<long>(batch.t()), sigma,
              std::string(to_string(cfg.mode)).c_str(),
              static_cast<unsigned long long>(cfg.master_seed));
  std::printf("PE %s (sigma_min=%.6g, sigma_max=%.6g)  SNR=%.4f dB (spectral), %.4f dB (frobenius)\n",
              pe.satisfied ? "satisfied" : "violated", pe.sigma_min, pe.sigma_max,
              snr_estimate(batch, NoiseNorm::spectral, cfg.snr_scale),
              snr_estimate(batch, NoiseNorm::frobenius, cfg.snr_scale));
  return kExitOk;
}

DataBatch batch_for(const CommonFlags& f, const std::string& data_dir, const BenchConfig& cfg) {
  if (!data_dir.empty()) {
    try {
      return import_batch(data_dir);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("cannot import batch: ") + e.what());
    }
  }
  (void)f;
  return generate_batch(cfg.model, cfg.horizon, first_sigma(cfg), cfg.mode, cfg.master_seed);
}

// solve: one regularized SDP (or the certainty-equivalent design).
int cmd_solve(const CommonFlags& f, const std::string& data_dir, bool ce) {
  const BenchConfig cfg = build_config(f, Target::table);
  const DataBatch batch = batch_for(f, data_dir, cfg);
  const SampleCov cov = sample_covariances(batch);
  const double lambda = first_lambda(cfg);
  LqrSolution sol;
  if (ce) {
    sol = ce_gain(cov, cfg.penalties);
  } else {
    RegularizedOptions opts;
    opts.solver = cfg.solver;
    const auto backend = conic::make_backend(cfg.backend, cfg.solver);
    opts.backend = backend.get();
    sol = solve_regularized(cov, cfg.penalties, lambda, opts);
  }
  std::printf("method=%s lambda=%g status=%s iterations=%d time=%.4fs objective=%.10g\n",
              ce ? "certainty-equivalence" : "sdp", lambda,
              std::string(conic::to_string(sol.status)).c_str(), sol.iterations, sol.solve_time,
              sol.objective);
  if (!sol.ok()) throw SolverFailure("solve did not reach optimality");
  print_matrix("K", sol.K);
  const double rho = spectral_radius(cfg.model.A + cfg.model.B * sol.K);
  std::printf("rho(A+BK) on the configured model = %.10g\n", rho);
  if (rho < 1.0) {
    const double c = lqr_cost(cfg.model, cfg.penalties, sol.K);
    const double cstar = solve_dare(cfg.model, cfg.penalties).cost;
    std::printf("C(K)=%.10g  C*=%.10g  gap=%.6g\n", c, cstar, (c - cstar) / cstar);
  }
  write_matrix_csv(cfg.out_dir / "K.csv", "K", sol.K);
  return kExitOk;
}

// bench: arbitrary sigma x lambda grid with per-trial records.
int cmd_bench(const CommonFlags& f) {
  const BenchConfig cfg = build_config(f, Target::table);
  const bench::Harness harness(cfg);
  std::vector<bench::TrialRecord> all;
  std::vector<bench::CellSummary> cells;
  for (double sigma : cfg.sigmas) {
    for (const auto& l : cfg.lambdas) {
      const auto records = harness.run_cell(sigma, l.resolve(cfg.horizon), cfg.trials);
      cells.push_back(bench::summarize(records));
      all.insert(all.end(), records.begin(), records.end());
    }
  }
  bench::write_trials_csv(cfg.out_dir / "trials.csv", all);
  bench::write_table1_csv(cfg.out_dir / "summary.csv", cells);
  std::cout << "C* = " << harness.optimal_cost() << '\n'
            << bench::format_table1(cells, isatty(STDOUT_FILENO) != 0);
  return kExitOk;
}

int cmd_table1(const CommonFlags& f) {
  const BenchConfig cfg = build_config(f, Target::table);
  const bench::Harness harness(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const auto cells = harness.table1();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto path = cfg.out_dir / "table1.csv";
  bench::write_table1_csv(path, cells);
  std::cout << bench::format_table1(cells, isatty(STDOUT_FILENO) != 0);
  std::printf("wrote %s (%zu cells, %.1fs)\n", path.string().c_str(), cells.size(), secs);
  return kExitOk;
}

int cmd_figure1(const CommonFlags& f) {
  const BenchConfig cfg = build_config(f, Target::figure);
  const bench::Harness harness(cfg);
  const auto points = harness.figure1();
  bench::write_figure1_csv(cfg.out_dir / "figure1.csv", points);
  bench::write_figure1_svg(cfg.out_dir / "figure1.svg", points, cfg.figure_sigma);
  std::printf("%-10s %8s %12s\n", "lambda", "S", "M");
  for (const auto& p : points) {
    std::printf("%-10g %7.1f%% %12s\n", p.lambda, p.summary.stabilizing_percent,
                p.summary.median_gap ? std::to_string(*p.summary.median_gap).c_str() : "-");
  }
  std::printf("wrote %s/figure1.{csv,svg}\n", cfg.out_dir.string().c_str());
  return kExitOk;
}

int cmd_export_sdpa(const CommonFlags& f, const std::string& data_dir, const std::string& file,
                    bool verify) {
  const BenchConfig cfg = build_config(f, Target::table);
  const DataBatch batch = batch_for(f, data_dir, cfg);
  const SampleCov cov = sample_covariances(batch);
  const double lambda = first_lambda(cfg);
  conic::AssembleOptions opts;
  opts.include_m_block = lambda > 0.0;
  const conic::ConicProgram prog = conic::assemble(cov, cfg.penalties, lambda, opts);
  const std::filesystem::path path = file.empty() ? cfg.out_dir / "problem.dat-s"
                                                  : std::filesystem::path(file);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  conic::export_sdpa(prog, path);
  std::printf("wrote %s (%ld variables, %ld equalities, %zu PSD blocks)\n", path.string().c_str(),
              static_cast<long>(prog.num_vars()), static_cast<long>(prog.num_equalities()),
              prog.blocks.size());
  if (verify) {
    const auto back = conic::import_sdpa(path);
    const auto a = conic::solve(prog);
    const auto b = conic::solve(back);
    if (a.status != conic::SolveStatus::optimal || b.status != conic::SolveStatus::optimal) {
      throw SolverFailure("verification solve failed");
    }
    std::printf("verify: objective %.12g (original) vs %.12g (re-read)\n", a.objective, b.objective);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven LQR via covariance-parameterized SDP"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string data_dir;
  std::string sdpa_file;
  bool ce = false;
  bool verify = false;

  auto* simulate = app.add_subcommand("simulate", "generate one data batch and write it as CSV");
  auto* solve = app.add_subcommand("solve", "solve the regularized SDP for one batch");
  auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo over a sigma x lambda grid");
  auto* table1 = app.add_subcommand("table1", "reproduce the sigma x lambda comparison table");
  auto* figure1 = app.add_subcommand("figure1", "lambda sweep at one noise level (CSV + SVG)");
  auto* sdpa = app.add_subcommand("export-sdpa", "write the SDP of one batch in SDPA sparse format");
  for (auto* sub : {simulate, solve, bench_cmd, table1, figure1, sdpa}) add_common(*sub, flags);
  solve->add_option("--data", data_dir, "directory with X0/U0/X1[/W0].csv (default: simulate)");
  solve->add_flag("--ce", ce, "certainty-equivalent design instead of the SDP");
  sdpa->add_option("--data", data_dir, "directory with X0/U0/X1[/W0].csv (default: simulate)");
  sdpa->add_option("--file", sdpa_file, "output path (default: <out>/problem.dat-s)");
  sdpa->add_flag("--verify", verify, "re-read the file and compare optimal values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(flags);
    if (*solve) return cmd_solve(flags, data_dir, ce);
    if (*bench_cmd) return cmd_bench(flags);
    if (*table1) return cmd_table1(flags);
    if (*figure1) return cmd_figure1(flags);
    if (*sdpa) return cmd_export_sdpa(flags, data_dir, sdpa_file, verify);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitConfig;
}
