#include <cmath>
#include <functional>

#include "covlqr/conic.hpp"
#include "covlqr/errors.hpp"

namespace covlqr::conic {

namespace {

const double kSqrt2 = std::sqrt(2.0);

Eigen::Index triangular_root(Eigen::Index len) {
  const auto d = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  return svec_length(d) == len ? d : -1;
}

using BlockFn = std::function<Matrix(const Matrix& Sigma, const Matrix& S, const Matrix& L,
                                     const Matrix& M)>;

// Linear part of one block, evaluated column by column on unit variables.
PsdBlock linear_block(const VariableLayout& layout, Eigen::Index dim, const BlockFn& fn,
                      const Matrix& offset, Eigen::Index n, Eigen::Index m) {
  PsdBlock block;
  block.dim = dim;
  block.offset = svec(offset);
  std::vector<Eigen::Triplet<double>> triplets;
  const Eigen::Index nvars = layout.num_vars();
  for (const auto& span : layout.spans) {
    for (Eigen::Index local = 0; local < span.size; ++local) {
      Matrix Sigma = Matrix::Zero(n, n);
      Matrix S = Matrix::Zero(n + m, n);
      Matrix L = Matrix::Zero(m, m);
      Matrix M = Matrix::Zero(n + m, n + m);
      const Matrix unit = VariableLayout::unit(span, local);
      if (span.name == "Sigma") Sigma = unit;
      else if (span.name == "S") S = unit;
      else if (span.name == "L") L = unit;
      else M = unit;
      const Vector col = svec(fn(Sigma, S, L, M));
      for (Eigen::Index r = 0; r < col.size(); ++r) {
        if (col[r] != 0.0) triplets.emplace_back(r, span.offset + local, col[r]);
      }
    }
  }
  block.map.resize(svec_length(dim), nvars);
  block.map.setFromTriplets(triplets.begin(), triplets.end());
  return block;
}

Matrix block2x2(const Matrix& tl, const Matrix& tr, const Matrix& br) {
  Matrix out(tl.rows() + br.rows(), tl.cols() + br.cols());
  out << tl, tr, tr.transpose(), br;
  return out;
}

}  // namespace

Vector svec(const Matrix& M) {
  if (M.rows() != M.cols()) {
    throw std::invalid_argument("svec: matrix " + shape_string(M) + " is not square");
  }
  const Eigen::Index d = M.rows();
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (d > 0 && (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("svec: matrix is not symmetric");
  }
  Vector v(svec_length(d));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) v[k++] = kSqrt2 * 0.5 * (M(i, j) + M(j, i));
    v[k++] = M(j, j);
  }
  return v;
}

Matrix smat(const Vector& v) {
  const Eigen::Index d = triangular_root(v.size());
  if (d < 0) {
    throw std::invalid_argument("smat: length " + std::to_string(v.size()) +
                                " is not a triangular number");
  }
  Matrix M(d, d);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      M(i, j) = M(j, i) = v[k++] / kSqrt2;
    }
    M(j, j) = v[k++];
  }
  return M;
}

const VariableSpan& VariableLayout::add(std::string name, Eigen::Index rows, Eigen::Index cols,
                                        bool symmetric) {
  if (symmetric && rows != cols) {
    throw std::invalid_argument("VariableLayout: symmetric span must be square");
  }
  VariableSpan span;
  span.name = std::move(name);
  span.offset = num_vars();
  span.rows = rows;
  span.cols = cols;
  span.symmetric = symmetric;
  span.size = symmetric ? svec_length(rows) : rows * cols;
  spans.push_back(std::move(span));
  return spans.back();
}

Eigen::Index VariableLayout::num_vars() const {
  return spans.empty() ? 0 : spans.back().offset + spans.back().size;
}

const VariableSpan* VariableLayout::find(std::string_view name) const {
  for (const auto& span : spans) {
    if (span.name == name) return &span;
  }
  return nullptr;
}

const VariableSpan& VariableLayout::at(std::string_view name) const {
  const VariableSpan* span = find(name);
  if (span == nullptr) throw std::out_of_range("VariableLayout: no span '" + std::string(name) + "'");
  return *span;
}

Matrix VariableLayout::unpack(std::string_view name, const Vector& x) const {
  const VariableSpan& span = at(name);
  const Vector seg = x.segment(span.offset, span.size);
  if (span.symmetric) return smat(seg);
  return Eigen::Map<const Matrix>(seg.data(), span.rows, span.cols);
}

void VariableLayout::pack(std::string_view name, const Matrix& M, Vector& x) const {
  const VariableSpan& span = at(name);
  require_shape(M, span.rows, span.cols, "VariableLayout::pack " + span.name);
  if (span.symmetric) {
    x.segment(span.offset, span.size) = svec(M);
  } else {
    x.segment(span.offset, span.size) = Eigen::Map<const Vector>(M.data(), span.size);
  }
}

Matrix VariableLayout::unit(const VariableSpan& span, Eigen::Index local) {
  Vector e = Vector::Zero(span.size);
  e[local] = 1.0;
  if (span.symmetric) return smat(e);
  return Eigen::Map<const Matrix>(e.data(), span.rows, span.cols);
}

Matrix PsdBlock::evaluate(const Vector& x) const { return smat(offset + map * x); }

void ConicProgram::validate() const {
  const Eigen::Index n = num_vars();
  if (layout.num_vars() != n) {
    throw std::invalid_argument("ConicProgram: layout covers " + std::to_string(layout.num_vars()) +
                                " variables, objective has " + std::to_string(n));
  }
  if (eq_A.rows() != eq_b.size() || (eq_A.rows() > 0 && eq_A.cols() != n)) {
    throw std::invalid_argument("ConicProgram: equality block has inconsistent shape");
  }
  for (const auto& block : blocks) {
    if (block.map.rows() != svec_length(block.dim) || block.offset.size() != svec_length(block.dim) ||
        block.map.cols() != n) {
      throw std::invalid_argument("ConicProgram: PSD block of dim " + std::to_string(block.dim) +
                                  " has inconsistent map");
    }
  }
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible:
      return "infeasible";
    case SolveStatus::unbounded:
      return "unbounded";
    case SolveStatus::numerical_failure:
      return "numerical_failure";
  }
  return "unknown";
}

ConicProgram assemble(const SampleCov& cov, const PenaltyPair& penalties, double lambda,
                      const AssembleOptions& options) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("assemble: lambda must be >= 0");
  if (!options.include_m_block && lambda != 0.0) {
    throw std::invalid_argument("assemble: the M block can only be dropped at lambda = 0");
  }
  const Eigen::Index n = cov.n();
  const Eigen::Index m = cov.m();
  const Eigen::Index d = n + m;
  require_shape(cov.Phi, d, d, "assemble: Phi");
  require_shape(cov.X0bar, n, d, "assemble: X0bar");
  require_shape(cov.U0bar, m, d, "assemble: U0bar");
  require_shape(cov.X1bar, n, d, "assemble: X1bar");
  require_shape(penalties.Q, n, n, "assemble: Q");
  require_shape(penalties.R, m, m, "assemble: R");

  ConicProgram prog;
  prog.layout.add("Sigma", n, n, true);
  prog.layout.add("S", d, n, false);
  prog.layout.add("L", m, m, true);
  if (options.include_m_block) prog.layout.add("M", d, d, true);
  const Eigen::Index nvars = prog.layout.num_vars();

  // Objective: Tr(Q Sigma) + Tr(R L) + lambda Tr(M Phi), read off unit variables.
  prog.objective = Vector::Zero(nvars);
  for (const auto& span : prog.layout.spans) {
    for (Eigen::Index local = 0; local < span.size; ++local) {
      const Matrix unit = VariableLayout::unit(span, local);
      double c = 0.0;
      if (span.name == "Sigma") c = (penalties.Q * unit).trace();
      else if (span.name == "L") c = (penalties.R * unit).trace();
      else if (span.name == "M") c = lambda * (cov.Phi * unit).trace();
      prog.objective[span.offset + local] = c;
    }
  }

  // Zero cone: vec(X0bar S - Sigma) = 0, column-major over the n x n entries.
  std::vector<Eigen::Triplet<double>> eq;
  for (const auto& span : prog.layout.spans) {
    if (span.name != "Sigma" && span.name != "S") continue;
    for (Eigen::Index local = 0; local < span.size; ++local) {
      const Matrix unit = VariableLayout::unit(span, local);
      const Matrix expr = span.name == "S" ? Matrix(cov.X0bar * unit) : Matrix(-unit);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          if (expr(i, j) != 0.0) eq.emplace_back(j * n + i, span.offset + local, expr(i, j));
        }
      }
    }
  }
  prog.eq_A.resize(n * n, nvars);
  prog.eq_A.setFromTriplets(eq.begin(), eq.end());
  prog.eq_b = Vector::Zero(n * n);

  const Matrix X1bar = cov.X1bar;
  const Matrix U0bar = cov.U0bar;
  Matrix offset1 = Matrix::Zero(2 * n, 2 * n);
  offset1.topLeftCorner(n, n) = -Matrix::Identity(n, n);
  prog.blocks.push_back(linear_block(
      prog.layout, 2 * n,
      [&](const Matrix& Sigma, const Matrix& S, const Matrix&, const Matrix&) {
        return block2x2(Sigma, X1bar * S, Sigma);
      },
      offset1, n, m));
  prog.blocks.push_back(linear_block(
      prog.layout, m + n,
      [&](const Matrix& Sigma, const Matrix& S, const Matrix& L, const Matrix&) {
        return block2x2(L, U0bar * S, Sigma);
      },
      Matrix::Zero(m + n, m + n), n, m));
  if (options.include_m_block) {
    prog.blocks.push_back(linear_block(
        prog.layout, d + n,
        [&](const Matrix& Sigma, const Matrix& S, const Matrix&, const Matrix& M) {
          return block2x2(M, S, Sigma);
        },
        Matrix::Zero(d + n, d + n), n, m));
  }
  prog.validate();
  return prog;
}

std::unique_ptr<Backend> make_backend(std::string_view name, const SolverSettings& settings) {
  if (name == "ipm" || name == "interior_point") {
    return std::make_unique<InteriorPointBackend>(settings);
  }
  throw ConfigError("unknown solver.backend '" + std::string(name) + "' (available: ipm)");
}

SolveReport solve(const ConicProgram& program) { return InteriorPointBackend{}.solve(program); }

SolveReport solve(const ConicProgram& program, const Backend& backend) {
  return backend.solve(program);
}

}  // namespace covlqr::conic
