#include <algorithm>
#include <cmath>
#include <limits>

#include "covlqr/conic.hpp"

namespace covlqr::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BlockData {
  Eigen::Index dim = 0;
  Matrix F0;
  std::vector<Eigen::Index> vars;  // columns of the map with nonzeros
  std::vector<Matrix> F;           // dense F_k for k in vars
  const SparseMatrix* map = nullptr;
};

// Largest alpha in [0, inf] with X + alpha dX PSD, for X positive definite.
double max_step(const Eigen::LLT<Matrix>& chol_x, const Matrix& dX) {
  const Matrix& L = chol_x.matrixL();
  const Matrix tmp = L.triangularView<Eigen::Lower>().solve(dX);
  const Matrix scaled = L.triangularView<Eigen::Lower>().solve(tmp.transpose());
  const double lo = min_eigenvalue(scaled);
  return lo >= 0.0 ? kInf : -1.0 / lo;
}

double inner(const Matrix& A, const Matrix& B) { return A.cwiseProduct(B).sum(); }

class Solver {
 public:
  Solver(const ConicProgram& prog, const SolverSettings& settings)
      : prog_(prog), settings_(settings) {
    nvars_ = prog.num_vars();
    neq_ = prog.num_equalities();
    A_ = Matrix(prog.eq_A);
    if (A_.rows() != neq_) A_.resize(neq_, nvars_);
    for (const auto& block : prog.blocks) {
      BlockData bd;
      bd.dim = block.dim;
      bd.F0 = smat(block.offset);
      bd.map = &block.map;
      for (Eigen::Index k = 0; k < block.map.cols(); ++k) {
        const Vector col = block.map.col(k);
        if (col.cwiseAbs().maxCoeff() == 0.0) continue;
        bd.vars.push_back(k);
        bd.F.push_back(smat(col));
      }
      nu_ += static_cast<double>(block.dim);
      blocks_.push_back(std::move(bd));
    }
  }

  SolveReport run();

 private:
  // A(dx) per block: sum_k dx_k F_k.
  std::vector<Matrix> apply_map(const Vector& dx, bool with_offset) const {
    std::vector<Matrix> out;
    out.reserve(blocks_.size());
    for (const auto& bd : blocks_) {
      Matrix acc = with_offset ? bd.F0 : Matrix::Zero(bd.dim, bd.dim);
      for (std::size_t i = 0; i < bd.vars.size(); ++i) acc += dx[bd.vars[i]] * bd.F[i];
      out.push_back(std::move(acc));
    }
    return out;
  }

  // A^*(Z)_k = sum_j <F_jk, Z_j>.
  Vector adjoint(const std::vector<Matrix>& Z) const {
    Vector out = Vector::Zero(nvars_);
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const Vector z = svec(symmetrize(Z[j]));
      out += blocks_[j].map->transpose() * z;
    }
    return out;
  }

  const ConicProgram& prog_;
  SolverSettings settings_;
  Eigen::Index nvars_ = 0;
  Eigen::Index neq_ = 0;
  double nu_ = 0.0;
  Matrix A_;
  std::vector<BlockData> blocks_;
};

SolveReport Solver::run() {
  SolveReport report;
  const Vector& c = prog_.objective;
  const Vector& b = prog_.eq_b;
  const std::size_t nb = blocks_.size();

  double f0_norm = 0.0;
  double f_max = 0.0;
  for (const auto& bd : blocks_) {
    f0_norm = std::max(f0_norm, bd.F0.norm());
    for (const auto& F : bd.F) f_max = std::max(f_max, F.norm());
  }
  const double c_norm = c.size() > 0 ? c.norm() : 0.0;
  const double b_norm = b.size() > 0 ? b.norm() : 0.0;

  Vector x = Vector::Zero(nvars_);
  Vector y = Vector::Zero(neq_);
  std::vector<Matrix> S(nb), Z(nb);
  {
    const double xi_p = 10.0 * std::max({1.0, f0_norm, b_norm / std::max(1.0, f_max)});
    const double xi_d = 10.0 * std::max({1.0, c_norm / std::max(1.0, f_max)});
    for (std::size_t j = 0; j < nb; ++j) {
      S[j] = xi_p * Matrix::Identity(blocks_[j].dim, blocks_[j].dim);
      Z[j] = xi_d * Matrix::Identity(blocks_[j].dim, blocks_[j].dim);
    }
  }

  auto finish = [&](SolveStatus status, int iter, double pobj, double dobj, Residuals res) {
    report.status = status;
    report.iterations = iter;
    report.x = x;
    report.objective = pobj;
    report.dual_objective = dobj;
    report.residuals = res;
    for (const auto& span : prog_.layout.spans) {
      report.values[span.name] = prog_.layout.unpack(span.name, x);
    }
    return report;
  };

  if (nb == 0 && neq_ == 0) {
    // Free unconstrained linear objective.
    const SolveStatus status = c_norm == 0.0 ? SolveStatus::optimal : SolveStatus::unbounded;
    return finish(status, 0, 0.0, 0.0, {});
  }

  for (int iter = 0; iter <= settings_.max_iterations; ++iter) {
    const std::vector<Matrix> Fx = apply_map(x, true);
    std::vector<Matrix> Rp(nb);
    double rp_norm2 = 0.0;
    double sz = 0.0;
    double f0z = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      Rp[j] = Fx[j] - S[j];
      rp_norm2 += Rp[j].squaredNorm();
      sz += inner(S[j], Z[j]);
      f0z += inner(blocks_[j].F0, Z[j]);
    }
    const Vector rb = neq_ > 0 ? Vector(b - A_ * x) : Vector();
    const Vector aty_az = (neq_ > 0 ? Vector(A_.transpose() * y) : Vector::Zero(nvars_)) +
                          adjoint(Z);
    const Vector rd = c - aty_az;

    const double pobj = c.dot(x);
    const double dobj = (neq_ > 0 ? b.dot(y) : 0.0) - f0z;
    Residuals res;
    res.primal = std::max(std::sqrt(rp_norm2) / (1.0 + f0_norm),
                          neq_ > 0 ? rb.norm() / (1.0 + b_norm) : 0.0);
    res.dual = rd.norm() / (1.0 + c_norm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    res.gap = std::max(sz, std::abs(pobj - dobj)) / denom;

    if (!x.allFinite() || !y.allFinite() || !std::isfinite(sz)) {
      return finish(SolveStatus::numerical_failure, iter, pobj, dobj, res);
    }
    if (res.primal <= settings_.feasibility_tolerance &&
        res.dual <= settings_.feasibility_tolerance && res.gap <= settings_.gap_tolerance) {
      return finish(SolveStatus::optimal, iter, pobj, dobj, res);
    }
    // Farkas certificate for the primal: A^T y + A^*(Z) = 0, Z PSD,
    // b^T y - <F0, Z> > 0.
    if (res.primal > settings_.feasibility_tolerance && dobj > 0.0 &&
        aty_az.norm() <= settings_.infeasibility_tolerance * dobj) {
      return finish(SolveStatus::infeasible, iter, pobj, dobj, res);
    }
    // Recession direction: A x = 0, A(x) PSD, c^T x < 0.
    if (res.dual > settings_.feasibility_tolerance && pobj < 0.0) {
      const double scale = -pobj;
      bool ray = neq_ == 0 || (A_ * x).norm() <= settings_.infeasibility_tolerance * scale;
      if (ray) {
        const std::vector<Matrix> hom = apply_map(x, false);
        for (std::size_t j = 0; j < nb && ray; ++j) {
          ray = min_eigenvalue(hom[j]) >= -settings_.infeasibility_tolerance * scale;
        }
      }
      if (ray) return finish(SolveStatus::unbounded, iter, pobj, dobj, res);
    }
    if (iter == settings_.max_iterations) break;

    // Schur matrix H_ik = sum_j tr(F_ji Z_j F_jk S_j^{-1}).
    std::vector<Matrix> Sinv(nb);
    std::vector<Eigen::LLT<Matrix>> cholS(nb), cholZ(nb);
    Matrix H = Matrix::Zero(nvars_, nvars_);
    for (std::size_t j = 0; j < nb; ++j) {
      cholS[j].compute(S[j]);
      cholZ[j].compute(Z[j]);
      if (cholS[j].info() != Eigen::Success || cholZ[j].info() != Eigen::Success) {
        return finish(SolveStatus::numerical_failure, iter, pobj, dobj, res);
      }
      Sinv[j] = symmetrize(cholS[j].solve(Matrix::Identity(blocks_[j].dim, blocks_[j].dim)));
      const BlockData& bd = blocks_[j];
      for (std::size_t kk = 0; kk < bd.vars.size(); ++kk) {
        const Matrix T = Z[j] * bd.F[kk] * Sinv[j];
        const Vector t = svec(symmetrize(T));
        H.col(bd.vars[kk]) += bd.map->transpose() * t;
      }
    }
    H = symmetrize(H);

    const Eigen::Index dim = nvars_ + neq_;
    Matrix kkt = Matrix::Zero(dim, dim);
    kkt.topLeftCorner(nvars_, nvars_) = -H;
    if (neq_ > 0) {
      kkt.topRightCorner(nvars_, neq_) = A_.transpose();
      kkt.bottomLeftCorner(neq_, nvars_) = A_;
    }
    const Eigen::PartialPivLU<Matrix> lu(kkt);

    struct Direction {
      Vector dx, dy;
      std::vector<Matrix> dS, dZ;
    };
    // Newton direction toward Z S = tau I, with second-order term `corr`
    // (added to Z S) when non-empty.
    auto direction = [&](double tau, const std::vector<Matrix>* corr) {
      std::vector<Matrix> G(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        Matrix inner_term = Z[j] * Rp[j];
        if (corr != nullptr) inner_term += (*corr)[j];
        G[j] = tau * Sinv[j] - Z[j] - symmetrize(inner_term * Sinv[j]);
      }
      Vector rhs(dim);
      rhs.head(nvars_) = rd - adjoint(G);
      if (neq_ > 0) rhs.tail(neq_) = rb;
      Vector sol = lu.solve(rhs);
      sol += lu.solve(rhs - kkt * sol);
      Direction d;
      d.dx = sol.head(nvars_);
      d.dy = sol.tail(neq_);
      d.dS = apply_map(d.dx, false);
      d.dZ.resize(nb);
      for (std::size_t j = 0; j < nb; ++j) {
        d.dZ[j] = G[j] - symmetrize(Z[j] * d.dS[j] * Sinv[j]);
        d.dS[j] += Rp[j];
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      double ap = kInf;
      double ad = kInf;
      for (std::size_t j = 0; j < nb; ++j) {
        ap = std::min(ap, max_step(cholS[j], d.dS[j]));
        ad = std::min(ad, max_step(cholZ[j], d.dZ[j]));
      }
      return std::pair{ap, ad};
    };

    const double mu = nu_ > 0.0 ? sz / nu_ : 0.0;
    const Direction pred = direction(0.0, nullptr);
    if (!pred.dx.allFinite()) return finish(SolveStatus::numerical_failure, iter, pobj, dobj, res);
    auto [ap_aff, ad_aff] = step_lengths(pred);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      mu_aff += inner(S[j] + ap_aff * pred.dS[j], Z[j] + ad_aff * pred.dZ[j]);
    }
    mu_aff /= nu_;
    const double ratio = mu > 0.0 ? std::clamp(mu_aff / mu, 0.0, 1.0) : 0.0;
    const double centering = std::pow(ratio, 3.0);

    std::vector<Matrix> corr(nb);
    for (std::size_t j = 0; j < nb; ++j) corr[j] = pred.dZ[j] * pred.dS[j];
    const Direction d = direction(centering * mu, &corr);
    if (!d.dx.allFinite()) return finish(SolveStatus::numerical_failure, iter, pobj, dobj, res);
    auto [ap, ad] = step_lengths(d);
    const double gamma = settings_.step_fraction;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);

    x += ap * d.dx;
    for (std::size_t j = 0; j < nb; ++j) {
      S[j] = symmetrize(S[j] + ap * d.dS[j]);
      Z[j] = symmetrize(Z[j] + ad * d.dZ[j]);
    }
    if (neq_ > 0) y += ad * d.dy;
  }
  // Iteration cap reached.
  const double pobj = c.dot(x);
  return finish(SolveStatus::numerical_failure, settings_.max_iterations, pobj, pobj, {});
}

}  // namespace

SolveReport InteriorPointBackend::solve(const ConicProgram& program) const {
  program.validate();
  return Solver(program, settings_).run();
}

}  // namespace covlqr::conic
