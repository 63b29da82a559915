#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "covlqr/data_engine.hpp"
#include "covlqr/errors.hpp"

namespace covlqr {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, int line) {
  const std::string field = trim(text);
  double value = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("invalid number '" + field + "'", line);
  }
  return value;
}

long parse_count(const std::string& text, int line) {
  const std::string field = trim(text);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || value < 0) {
    throw ParseError("invalid dimension '" + field + "'", line);
  }
  return value;
}

}  // namespace

void write_matrix_csv(const std::filesystem::path& path, std::string_view name, const Matrix& M) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "matrix,rows,cols\n" << name << ',' << M.rows() << ',' << M.cols() << '\n';
  char buf[32];
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
      if (i > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Matrix read_matrix_csv(const std::filesystem::path& path, std::string* name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line() || trim(line) != "matrix,rows,cols") {
    throw ParseError(path.string() + ": expected header 'matrix,rows,cols'", lineno);
  }
  if (!next_line()) throw ParseError(path.string() + ": missing shape line", lineno);
  const auto meta = split_commas(line);
  if (meta.size() != 3) throw ParseError(path.string() + ": shape line needs 3 fields", lineno);
  if (name != nullptr) *name = trim(meta[0]);
  const long rows = parse_count(meta[1], lineno);
  const long cols = parse_count(meta[2], lineno);
  Matrix M(rows, cols);
  for (long j = 0; j < cols; ++j) {
    if (!next_line()) {
      throw ParseError(path.string() + ": expected " + std::to_string(cols) + " column lines",
                       lineno);
    }
    const auto fields = split_commas(line);
    if (static_cast<long>(fields.size()) != rows) {
      throw ParseError(path.string() + ": column has " + std::to_string(fields.size()) +
                           " entries, expected " + std::to_string(rows),
                       lineno);
    }
    for (long i = 0; i < rows; ++i) M(i, j) = parse_double(fields[i], lineno);
  }
  if (next_line()) throw ParseError(path.string() + ": trailing data", lineno);
  return M;
}

void export_batch(const DataBatch& batch, const std::filesystem::path& dir) {
  batch.validate();
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "X0.csv", "X0", batch.X0);
  write_matrix_csv(dir / "U0.csv", "U0", batch.U0);
  if (batch.noise_known) write_matrix_csv(dir / "W0.csv", "W0", batch.W0);
  write_matrix_csv(dir / "X1.csv", "X1", batch.X1);
}

DataBatch import_batch(const std::filesystem::path& dir) {
  DataBatch batch;
  batch.X0 = read_matrix_csv(dir / "X0.csv");
  batch.U0 = read_matrix_csv(dir / "U0.csv");
  batch.X1 = read_matrix_csv(dir / "X1.csv");
  if (std::filesystem::exists(dir / "W0.csv")) {
    batch.W0 = read_matrix_csv(dir / "W0.csv");
  } else {
    batch.W0 = Matrix::Zero(batch.X0.rows(), batch.X0.cols());
    batch.noise_known = false;
  }
  batch.validate();
  return batch;
}

}  // namespace covlqr
