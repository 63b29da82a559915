#include <fstream>
#include <set>
#include <sstream>

#include "covlqr/bench.hpp"
#include "covlqr/errors.hpp"
#include "json.hpp"

namespace covlqr::bench {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

Matrix matrix_from_json(const json& j, const std::filesystem::path& base, const std::string& what) {
  if (j.is_string()) {
    std::filesystem::path p = j.get<std::string>();
    if (p.is_relative()) p = base / p;
    try {
      return read_matrix_csv(p);
    } catch (const std::exception& e) {
      throw ConfigError(what + ": " + e.what());
    }
  }
  if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError(what + ": rows must be non-empty arrays");
  Matrix M(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ConfigError(what + ": ragged rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw ConfigError(what + ": non-numeric entry");
      M(i, k) = j[i][k].get<double>();
    }
  }
  return M;
}

LambdaSpec lambda_from_json(const json& j) {
  if (j.is_number()) {
    const double v = j.get<double>();
    if (!(v >= 0.0)) throw ConfigError("lambda must be >= 0");
    return LambdaSpec::fixed(v);
  }
  if (j.is_string()) return parse_lambda(j.get<std::string>());
  if (j.is_object()) {
    reject_unknown(j, {"schedule", "c"}, "lambda");
    if (j.value("schedule", "") != "inv_sqrt_t" || !j.contains("c") || !j["c"].is_number()) {
      throw ConfigError("lambda schedule must be {\"schedule\": \"inv_sqrt_t\", \"c\": <value>}");
    }
    const double c = j["c"].get<double>();
    if (!(c > 0.0)) throw ConfigError("lambda schedule needs c > 0");
    return LambdaSpec::inv_sqrt_t(c);
  }
  throw ConfigError("lambda entries must be numbers or schedules");
}

std::vector<LambdaSpec> lambdas_from_json(const json& j) {
  std::vector<LambdaSpec> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(lambda_from_json(e));
  } else {
    out.push_back(lambda_from_json(j));
  }
  return out;
}

std::vector<double> doubles_from_json(const json& j, const std::string& what) {
  std::vector<double> out;
  auto one = [&](const json& e) {
    if (!e.is_number()) throw ConfigError(what + " must be numeric");
    out.push_back(e.get<double>());
  };
  if (j.is_array()) {
    for (const auto& e : j) one(e);
  } else {
    one(j);
  }
  return out;
}

BenchConfig from_json(const json& root, const std::filesystem::path& base) {
  if (!root.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(root,
                 {"model", "Q", "R", "t", "sigma", "lambda", "trials", "figure", "master_seed",
                  "mode", "out", "workers", "solver", "snr_db_scale"},
                 "configuration");
  BenchConfig cfg;
  try {
    if (root.contains("model")) {
      const json& m = root["model"];
      if (m.is_string() && m.get<std::string>() == "benchmark") {
        cfg.model = SystemModel::laplacian_benchmark();
      } else if (m.is_object()) {
        reject_unknown(m, {"A", "B"}, "model");
        if (!m.contains("A") || !m.contains("B")) throw ConfigError("model needs A and B");
        cfg.model.A = matrix_from_json(m["A"], base, "model.A");
        cfg.model.B = matrix_from_json(m["B"], base, "model.B");
        // Default weights follow the model's dimensions.
        cfg.penalties.Q = Matrix::Identity(cfg.model.n(), cfg.model.n());
        cfg.penalties.R = 1e-3 * Matrix::Identity(cfg.model.m(), cfg.model.m());
      } else {
        throw ConfigError("model must be \"benchmark\" or {\"A\": ..., \"B\": ...}");
      }
    }
    if (root.contains("Q")) cfg.penalties.Q = matrix_from_json(root["Q"], base, "Q");
    if (root.contains("R")) cfg.penalties.R = matrix_from_json(root["R"], base, "R");
    if (root.contains("t")) cfg.horizon = root["t"].get<long>();
    if (root.contains("sigma")) cfg.sigmas = doubles_from_json(root["sigma"], "sigma");
    if (root.contains("lambda")) cfg.lambdas = lambdas_from_json(root["lambda"]);
    if (root.contains("trials")) cfg.trials = root["trials"].get<long>();
    if (root.contains("figure")) {
      const json& f = root["figure"];
      reject_unknown(f, {"trials", "sigma", "lambda"}, "figure");
      if (f.contains("trials")) cfg.figure_trials = f["trials"].get<long>();
      if (f.contains("sigma")) cfg.figure_sigma = f["sigma"].get<double>();
      if (f.contains("lambda")) cfg.figure_lambdas = lambdas_from_json(f["lambda"]);
    }
    if (root.contains("master_seed")) cfg.master_seed = root["master_seed"].get<std::uint64_t>();
    if (root.contains("mode")) cfg.mode = parse_data_mode(root["mode"].get<std::string>());
    if (root.contains("out")) cfg.out_dir = root["out"].get<std::string>();
    if (root.contains("workers")) cfg.workers = root["workers"].get<int>();
    if (root.contains("snr_db_scale")) {
      const auto s = root["snr_db_scale"].get<std::string>();
      if (s == "amplitude") cfg.snr_scale = DecibelScale::amplitude;
      else if (s == "power") cfg.snr_scale = DecibelScale::power;
      else throw ConfigError("snr_db_scale must be \"amplitude\" or \"power\"");
    }
    if (root.contains("solver")) {
      const json& s = root["solver"];
      reject_unknown(s,
                     {"backend", "gap_tolerance", "feasibility_tolerance",
                      "infeasibility_tolerance", "max_iterations", "step_fraction"},
                     "solver");
      if (s.contains("backend")) cfg.backend = s["backend"].get<std::string>();
      if (s.contains("gap_tolerance")) cfg.solver.gap_tolerance = s["gap_tolerance"].get<double>();
      if (s.contains("feasibility_tolerance")) {
        cfg.solver.feasibility_tolerance = s["feasibility_tolerance"].get<double>();
      }
      if (s.contains("infeasibility_tolerance")) {
        cfg.solver.infeasibility_tolerance = s["infeasibility_tolerance"].get<double>();
      }
      if (s.contains("max_iterations")) cfg.solver.max_iterations = s["max_iterations"].get<int>();
      if (s.contains("step_fraction")) cfg.solver.step_fraction = s["step_fraction"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("configuration type error: ") + e.what());
  }
  return cfg;
}

}  // namespace

BenchConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return from_json(root, std::filesystem::current_path());
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json root;
  try {
    root = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return from_json(root, path.parent_path());
}

}  // namespace covlqr::bench
