#include "covlqr/sdpa.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "covlqr/errors.hpp"

namespace covlqr::conic {

namespace {

constexpr const char* kEqualityTag = "covlqr-equalities";
constexpr const char* kSpanTag = "covlqr-span";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  int matno;
  int block;
  int i;
  int j;
  double value;
};

// Splits on whitespace and the punctuation SDPA allows around numbers.
std::vector<std::string> tokenize(const std::string& line) {
  std::string cleaned = line;
  for (char& ch : cleaned) {
    if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == '=') ch = ' ';
  }
  std::vector<std::string> out;
  std::istringstream in(cleaned);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::optional<double> to_double(const std::string& tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

std::optional<long> to_long(const std::string& tok) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

}  // namespace

void write_sdpa(std::ostream& out, const ConicProgram& program) {
  program.validate();
  const Eigen::Index nvars = program.num_vars();
  const Eigen::Index neq = program.num_equalities();
  const std::size_t npsd = program.blocks.size();
  const std::size_t nblocks = npsd + (neq > 0 ? 1 : 0);

  out << "\"covlqr conic program: " << nvars << " variables, " << neq << " equalities, " << npsd
      << " PSD blocks\n";
  for (const auto& span : program.layout.spans) {
    out << "* " << kSpanTag << ' ' << span.name << ' ' << span.offset << ' ' << span.size << ' '
        << span.rows << ' ' << span.cols << ' ' << (span.symmetric ? 1 : 0) << '\n';
  }
  if (neq > 0) out << "* " << kEqualityTag << ' ' << nblocks << '\n';
  out << nvars << " = mDIM\n" << nblocks << " = nBLOCK\n";
  if (nblocks == 0) return;

  for (std::size_t k = 0; k < npsd; ++k) out << (k ? " " : "") << program.blocks[k].dim;
  if (neq > 0) out << (npsd ? " " : "") << -2 * neq;
  out << " = bLOCKsTRUCT\n";
  for (Eigen::Index k = 0; k < nvars; ++k) out << (k ? " " : "") << fmt(program.objective[k]);
  out << '\n';

  auto emit = [&](int matno, std::size_t block, Eigen::Index i, Eigen::Index j, double v) {
    if (v == 0.0) return;
    out << matno << ' ' << block << ' ' << i + 1 << ' ' << j + 1 << ' ' << fmt(v) << '\n';
  };
  for (std::size_t k = 0; k < npsd; ++k) {
    const PsdBlock& blk = program.blocks[k];
    const Matrix F0 = -smat(blk.offset);
    for (Eigen::Index j = 0; j < blk.dim; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) emit(0, k + 1, i, j, F0(i, j));
    }
    for (Eigen::Index var = 0; var < nvars; ++var) {
      const Vector col = blk.map.col(var);
      if (col.cwiseAbs().maxCoeff() == 0.0) continue;
      const Matrix F = smat(col);
      for (Eigen::Index j = 0; j < blk.dim; ++j) {
        for (Eigen::Index i = 0; i <= j; ++i) emit(static_cast<int>(var + 1), k + 1, i, j, F(i, j));
      }
    }
  }
  if (neq > 0) {
    const std::size_t eb = nblocks;
    const Matrix A(program.eq_A);
    for (Eigen::Index r = 0; r < neq; ++r) {
      emit(0, eb, 2 * r, 2 * r, program.eq_b[r]);
      emit(0, eb, 2 * r + 1, 2 * r + 1, -program.eq_b[r]);
    }
    for (Eigen::Index var = 0; var < nvars; ++var) {
      for (Eigen::Index r = 0; r < neq; ++r) {
        emit(static_cast<int>(var + 1), eb, 2 * r, 2 * r, A(r, var));
        emit(static_cast<int>(var + 1), eb, 2 * r + 1, 2 * r + 1, -A(r, var));
      }
    }
  }
}

void export_sdpa(const ConicProgram& program, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_sdpa(out, program);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

ConicProgram read_sdpa(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::vector<VariableSpan> spans;
  long equality_block = 0;

  // Header comments.
  std::vector<std::pair<int, std::string>> body;
  bool in_header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (in_header && !line.empty() && (line[0] == '"' || line[0] == '*')) {
      std::istringstream c(line.substr(1));
      std::string tag;
      c >> tag;
      if (tag == kSpanTag) {
        VariableSpan s;
        int sym = 0;
        if (!(c >> s.name >> s.offset >> s.size >> s.rows >> s.cols >> sym)) {
          throw ParseError("malformed span comment", lineno);
        }
        s.symmetric = sym != 0;
        spans.push_back(s);
      } else if (tag == kEqualityTag) {
        if (!(c >> equality_block)) throw ParseError("malformed equality comment", lineno);
      }
      continue;
    }
    in_header = false;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    body.emplace_back(lineno, line);
  }

  std::size_t cursor = 0;
  auto current_line = [&]() { return cursor < body.size() ? body[cursor].first : lineno; };
  auto first_int = [&](const char* what) -> long {
    if (cursor >= body.size()) throw ParseError(std::string("missing ") + what, lineno);
    const auto toks = tokenize(body[cursor].second);
    const auto v = toks.empty() ? std::nullopt : to_long(toks[0]);
    if (!v || *v < 0) throw ParseError(std::string("expected ") + what, body[cursor].first);
    ++cursor;
    return *v;
  };
  // Reads `count` numbers possibly spread over lines; the rest of the last
  // line is ignored.
  auto numbers = [&](long count, const char* what) {
    std::vector<double> vals;
    while (static_cast<long>(vals.size()) < count) {
      if (cursor >= body.size()) throw ParseError(std::string("truncated ") + what, lineno);
      const auto toks = tokenize(body[cursor].second);
      for (const auto& tok : toks) {
        if (static_cast<long>(vals.size()) == count) break;
        const auto v = to_double(tok);
        if (!v) {
          if (vals.empty() || tok.find_first_of("0123456789") != std::string::npos) {
            throw ParseError(std::string("invalid number '") + tok + "' in " + what,
                             body[cursor].first);
          }
          break;
        }
        vals.push_back(*v);
      }
      ++cursor;
    }
    return vals;
  };

  const long nvars = first_int("mDIM");
  const long nblocks = first_int("nBLOCK");
  std::vector<long> structure;
  for (double v : numbers(nblocks, "block structure")) {
    if (v != std::floor(v) || v == 0.0) throw ParseError("bad block size", current_line());
    structure.push_back(static_cast<long>(v));
  }
  const std::vector<double> cvals = numbers(nvars, "objective vector");

  std::vector<Entry> entries;
  for (; cursor < body.size(); ++cursor) {
    const int ln = body[cursor].first;
    const auto toks = tokenize(body[cursor].second);
    if (toks.size() < 5) throw ParseError("entry needs 5 fields", ln);
    const auto matno = to_long(toks[0]);
    const auto blk = to_long(toks[1]);
    const auto i = to_long(toks[2]);
    const auto j = to_long(toks[3]);
    const auto v = to_double(toks[4]);
    if (!matno || !blk || !i || !j || !v) throw ParseError("malformed entry", ln);
    if (*matno < 0 || *matno > nvars) throw ParseError("matrix number out of range", ln);
    if (*blk < 1 || *blk > nblocks) throw ParseError("block number out of range", ln);
    const long dim = std::labs(structure[*blk - 1]);
    if (*i < 1 || *j < 1 || *i > dim || *j > dim) throw ParseError("index out of range", ln);
    if (structure[*blk - 1] < 0 && *i != *j) throw ParseError("off-diagonal in diagonal block", ln);
    entries.push_back(Entry{static_cast<int>(*matno), static_cast<int>(*blk),
                            static_cast<int>(std::min(*i, *j) - 1),
                            static_cast<int>(std::max(*i, *j) - 1), *v});
  }

  // Dense per-block coefficient matrices F_block[matno].
  std::vector<std::map<int, Matrix>> coeffs(nblocks);
  for (const Entry& e : entries) {
    auto& mats = coeffs[e.block - 1];
    const long dim = std::labs(structure[e.block - 1]);
    auto it = mats.try_emplace(e.matno, Matrix::Zero(dim, dim)).first;
    it->second(e.i, e.j) = e.value;
    it->second(e.j, e.i) = e.value;
  }

  ConicProgram prog;
  prog.objective = Eigen::Map<const Vector>(cvals.data(), nvars);
  std::vector<Eigen::Triplet<double>> eq_triplets;
  std::vector<double> eq_b;

  for (long k = 0; k < nblocks; ++k) {
    const long size = structure[k];
    auto& mats = coeffs[k];
    auto coef = [&](int matno) -> const Matrix* {
      const auto it = mats.find(matno);
      return it == mats.end() ? nullptr : &it->second;
    };
    if (k + 1 == equality_block) {
      if (size > 0 || (-size) % 2 != 0) throw ParseError("equality block must be even diagonal", 0);
      const long pairs = -size / 2;
      for (long r = 0; r < pairs; ++r) {
        for (int matno = 0; matno <= nvars; ++matno) {
          const Matrix* F = coef(matno);
          const double a = F ? (*F)(2 * r, 2 * r) : 0.0;
          const double a2 = F ? (*F)(2 * r + 1, 2 * r + 1) : 0.0;
          if (a != -a2) throw ParseError("equality block entries are not paired", 0);
          if (matno == 0) {
            eq_b.push_back(a);
          } else if (a != 0.0) {
            eq_triplets.emplace_back(r, matno - 1, a);
          }
        }
      }
      continue;
    }
    const long dim = std::labs(size);
    const long pieces = size < 0 ? dim : 1;
    const long piece_dim = size < 0 ? 1 : dim;
    for (long p = 0; p < pieces; ++p) {
      PsdBlock blk;
      blk.dim = piece_dim;
      auto slice = [&](const Matrix& F) -> Matrix {
        return size < 0 ? Matrix::Constant(1, 1, F(p, p)) : F;
      };
      const Matrix* F0 = coef(0);
      blk.offset = F0 ? Vector(-svec(slice(*F0))) : Vector::Zero(svec_length(piece_dim));
      std::vector<Eigen::Triplet<double>> trip;
      for (const auto& [matno, F] : mats) {
        if (matno == 0) continue;
        const Vector col = svec(slice(F));
        for (Eigen::Index r = 0; r < col.size(); ++r) {
          if (col[r] != 0.0) trip.emplace_back(r, matno - 1, col[r]);
        }
      }
      blk.map.resize(svec_length(piece_dim), nvars);
      blk.map.setFromTriplets(trip.begin(), trip.end());
      prog.blocks.push_back(std::move(blk));
    }
  }
  prog.eq_b = Eigen::Map<const Vector>(eq_b.data(), static_cast<Eigen::Index>(eq_b.size()));
  prog.eq_A.resize(prog.eq_b.size(), nvars);
  prog.eq_A.setFromTriplets(eq_triplets.begin(), eq_triplets.end());

  Eigen::Index covered = 0;
  for (const auto& s : spans) covered = std::max(covered, s.offset + s.size);
  if (!spans.empty() && covered == nvars) {
    prog.layout.spans = spans;
  } else if (nvars > 0) {
    prog.layout.add("x", nvars, 1, false);
  }
  prog.validate();
  return prog;
}

ConicProgram import_sdpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_sdpa(in);
}

}  // namespace covlqr::conic
