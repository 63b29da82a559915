#pragma once

#include <Eigen/Sparse>

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "covlqr/control_core.hpp"
#include "covlqr/data_engine.hpp"
#include "covlqr/linalg.hpp"

namespace covlqr::conic {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// d (d + 1) / 2.
constexpr Eigen::Index svec_length(Eigen::Index d) { return d * (d + 1) / 2; }

/// Upper triangle of a symmetric matrix, column by column
/// ((0,0), (0,1), (1,1), (0,2), ...), off-diagonals scaled by sqrt(2) so that
/// <A, B>_F = svec(A) . svec(B). Throws std::invalid_argument if M is not
/// symmetric to 1e-12 (relative to its largest entry, floored at 1).
Vector svec(const Matrix& M);

/// Inverse of svec. Throws std::invalid_argument on a non-triangular length.
Matrix smat(const Vector& v);

/// A named matrix-valued decision variable occupying x[offset, offset+size).
/// Symmetric variables store svec coordinates; general ones store entries
/// in column-major order.
struct VariableSpan {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  bool symmetric = false;
};

struct VariableLayout {
  std::vector<VariableSpan> spans;

  /// Appends a span after the existing ones.
  const VariableSpan& add(std::string name, Eigen::Index rows, Eigen::Index cols, bool symmetric);
  Eigen::Index num_vars() const;
  const VariableSpan* find(std::string_view name) const;
  const VariableSpan& at(std::string_view name) const;
  /// The matrix stored in `x` for span `name`.
  Matrix unpack(std::string_view name, const Vector& x) const;
  /// Writes M into `x` at span `name`.
  void pack(std::string_view name, const Matrix& M, Vector& x) const;
  /// The matrix of span `span` whose only nonzero coordinate is `local`.
  static Matrix unit(const VariableSpan& span, Eigen::Index local);
};

/// The constraint svec(F(x)) = offset + map * x, F(x) in the PSD cone.
struct PsdBlock {
  Eigen::Index dim = 0;
  SparseMatrix map;  // svec_length(dim) x num_vars
  Vector offset;     // svec_length(dim)

  Matrix evaluate(const Vector& x) const;
};

/// min objective . x  s.t.  eq_A x = eq_b,  F_j(x) PSD for every block j.
struct ConicProgram {
  Vector objective;
  SparseMatrix eq_A;  // rows x num_vars
  Vector eq_b;
  std::vector<PsdBlock> blocks;
  VariableLayout layout;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_equalities() const { return eq_b.size(); }
  /// Throws std::invalid_argument when the pieces disagree in size.
  void validate() const;
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };
std::string_view to_string(SolveStatus status);

struct Residuals {
  double primal = 0.0;  // relative primal infeasibility
  double dual = 0.0;    // relative dual infeasibility
  double gap = 0.0;     // relative duality gap
};

struct SolveReport {
  SolveStatus status = SolveStatus::numerical_failure;
  Vector x;
  std::map<std::string, Matrix> values;  // x split per layout span
  double objective = 0.0;
  double dual_objective = 0.0;
  int iterations = 0;
  Residuals residuals;
};

struct SolverSettings {
  double gap_tolerance = 1e-8;
  double feasibility_tolerance = 1e-8;
  double infeasibility_tolerance = 1e-8;  // Farkas-ratio threshold
  int max_iterations = 100;
  double step_fraction = 0.98;
};

/// Program in, report out.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string_view name() const = 0;
  virtual SolveReport solve(const ConicProgram& program) const = 0;
};

/// Infeasible-start primal-dual path following (HKM direction with a Mehrotra
/// predictor-corrector) for zero and PSD cones.
class InteriorPointBackend final : public Backend {
 public:
  explicit InteriorPointBackend(SolverSettings settings = {}) : settings_(settings) {}
  std::string_view name() const override { return "ipm"; }
  SolveReport solve(const ConicProgram& program) const override;
  const SolverSettings& settings() const { return settings_; }

 private:
  SolverSettings settings_;
};

/// Backend registered under `name` (value of the `solver.backend` key).
/// Throws ConfigError for unknown names.
std::unique_ptr<Backend> make_backend(std::string_view name, const SolverSettings& settings = {});

/// Solves with the in-process interior-point backend.
SolveReport solve(const ConicProgram& program);
SolveReport solve(const ConicProgram& program, const Backend& backend);

struct AssembleOptions {
  /// Without the M block the lambda term is dropped; only valid at lambda = 0.
  bool include_m_block = true;
};

/// Conic form of the regularized covariance-parameterized LQR program
///
///   min Tr(Q Sigma) + Tr(R L) + lambda Tr(M Phi)
///   s.t. X0bar S = Sigma,
///        [Sigma - I, X1bar S; *, Sigma] >= 0,
///        [L, U0bar S; *, Sigma] >= 0,
///        [M, S; *, Sigma] >= 0,
///
/// with variables Sigma, S, L, M laid out in that order.
ConicProgram assemble(const SampleCov& cov, const PenaltyPair& penalties, double lambda,
                      const AssembleOptions& options = {});

}  // namespace covlqr::conic
