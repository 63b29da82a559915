#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "covlqr/data_engine.hpp"

#ifndef COVLQR_CLI_PATH
#error "COVLQR_CLI_PATH must point at the covlqr executable"
#endif

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("covlqr_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + COVLQR_CLI_PATH + "' " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Cli, Table1WritesCsv) {
  const fs::path out = scratch("table1");
  ASSERT_EQ(run("table1 --trials 3 --seed 1 --workers 1 --out " + out.string()), 0);
  std::ifstream in(out / "table1.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "sigma,lambda,trials,S_percent,M_median,snr_db_lo,snr_db_hi,mean_solve_time_s");
}

TEST(Cli, Figure1WritesCsvAndSvg) {
  const fs::path out = scratch("figure1");
  ASSERT_EQ(run("figure1 --trials 5 --sigma 0.7 --lambda 0,0.1,1 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "figure1.csv"));
  EXPECT_TRUE(fs::exists(out / "figure1.svg"));
}

TEST(Cli, BenchSimulateSolveExport) {
  const fs::path out = scratch("pipeline");
  ASSERT_EQ(run("bench --trials 3 --sigma 0.3 --lambda 0,0.1 --mode trajectory --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "trials.csv"));
  ASSERT_EQ(run("simulate --seed 4 --sigma 0.5 --out " + (out / "data").string()), 0);
  EXPECT_TRUE(fs::exists(out / "data" / "X0.csv"));
  ASSERT_EQ(run("solve --data " + (out / "data").string() + " --lambda 0.1 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "K.csv"));
  ASSERT_EQ(run("export-sdpa --data " + (out / "data").string() + " --lambda 0.1 --verify --file " +
                (out / "p.dat-s").string()),
            0);
  EXPECT_TRUE(fs::exists(out / "p.dat-s"));
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const fs::path out = scratch("config");
  {
    std::ofstream(out / "c.json") << R"({"trials": 2, "sigma": [0.1], "lambda": [0.1], "solver": {"backend": "ipm"}})";
  }
  ASSERT_EQ(run("table1 --config " + (out / "c.json").string() + " --trials 4 --out " + out.string()), 0);
  const std::string csv = slurp(out / "table1.csv");
  EXPECT_NE(csv.find("\n0.1,0.1,4,"), std::string::npos) << csv;
}

TEST(Cli, SeedEnvironmentFallback) {
  const fs::path out = scratch("seed");
  ASSERT_EQ(run("simulate --sigma 0.5 --out " + (out / "flag").string() + " --seed 77"), 0);
  ASSERT_EQ(run("simulate --sigma 0.5 --out " + (out / "env").string(), "COVLQR_SEED=77"), 0);
  ASSERT_EQ(run("simulate --sigma 0.5 --out " + (out / "other").string(), "COVLQR_SEED=78"), 0);
  EXPECT_EQ(slurp(out / "flag" / "X0.csv"), slurp(out / "env" / "X0.csv"));
  EXPECT_NE(slurp(out / "flag" / "X0.csv"), slurp(out / "other" / "X0.csv"));
}

TEST(Cli, ConfigErrorsExitTwo) {
  const fs::path out = scratch("errors");
  {
    std::ofstream(out / "bad.json") << R"({"trails": 3})";
  }
  EXPECT_EQ(run("table1 --config " + (out / "bad.json").string()), 2);
  EXPECT_EQ(run("table1 --config " + (out / "missing.json").string()), 2);
  EXPECT_EQ(run("table1 --sigma -1"), 2);
  EXPECT_EQ(run("table1 --lambda nope"), 2);
  EXPECT_EQ(run("table1 --backend nosuch"), 2);
  EXPECT_EQ(run("table1 --mode sideways"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("simulate --out " + out.string(), "COVLQR_SEED=abc"), 2);
  EXPECT_EQ(run("solve --data " + (out / "nothing").string()), 2);
}

TEST(Cli, SolverFailureExitsThree) {
  // Four columns cannot excite six directions: the SDP is declared infeasible.
  const fs::path out = scratch("solver");
  const auto batch = covlqr::generate_batch(covlqr::SystemModel::laplacian_benchmark(), 4, 0.5,
                                            covlqr::DataMode::iid_pairs, 1);
  covlqr::export_batch(batch, out / "thin");
  EXPECT_EQ(run("solve --data " + (out / "thin").string() + " --lambda 0.1 --out " + out.string()), 3);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help"), 0); }

}  // namespace
