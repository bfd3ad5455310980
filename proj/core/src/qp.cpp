#include "rbsim/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rbsim/errors.hpp"

namespace rbsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const QpProblem& p) {
  const int d = p.dim();
  const int m = p.rows();
  if (p.Q.rows() != d || p.Q.cols() != d) throw BadProblem("Q is not d x d");
  if (p.A.rows() != m || (m > 0 && p.A.cols() != d)) throw BadProblem("A is not m x d");
  if (p.upper.size() != m) throw BadProblem("bound vectors disagree in size");
  const double qscale = 1.0 + p.Q.cwiseAbs().maxCoeff();
  if ((p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qscale) {
    throw BadProblem("Q is not symmetric");
  }
  for (int i = 0; i < m; ++i) {
    if (p.lower[i] > p.upper[i]) throw BadProblem("lower > upper on row " + std::to_string(i));
  }
}

double row_value(const QpProblem& p, const VecX& x, int i) { return p.A.row(i).dot(x); }

/// Cyclic projection onto the most violated half-space until feasible.
/// Converges for consistent systems; failure to converge is reported as
/// infeasible by the caller.
bool repair_feasibility(const QpProblem& p, VecX& x, double tol) {
  const int m = p.rows();
  if (m == 0) return true;
  const int max_pass = 100 * m + 100;
  for (int pass = 0; pass < max_pass; ++pass) {
    double worst = 0.0;
    int worst_row = -1;
    double target = 0.0;
    for (int i = 0; i < m; ++i) {
      const double v = row_value(p, x, i);
      if (v < p.lower[i] - tol && p.lower[i] - v > worst) {
        worst = p.lower[i] - v;
        worst_row = i;
        target = p.lower[i];
      } else if (v > p.upper[i] + tol && v - p.upper[i] > worst) {
        worst = v - p.upper[i];
        worst_row = i;
        target = p.upper[i];
      }
    }
    if (worst_row < 0) return true;
    const double nrm2 = p.A.row(worst_row).squaredNorm();
    if (nrm2 <= 0.0) return false;  // 0 <= 0-row with violated bound: inconsistent
    x += p.A.row(worst_row).transpose() * ((target - row_value(p, x, worst_row)) / nrm2);
  }
  return false;
}

}  // namespace

void QpSolver::reset() {
  warm_set_.clear();
  warm_x_.resize(0);
  warm_dim_ = -1;
  warm_rows_ = -1;
}

QpResult QpSolver::solve(const QpProblem& p, const QpOptions& opt) {
  validate(p);
  const int d = p.dim();
  const int m = p.rows();
  const double feas_tol = std::max(opt.tol, 1e-12);

  QpResult result;
  VecX x = VecX::Zero(d);
  std::vector<WorkingConstraint> working;

  if (opt.warm_start && warm_dim_ == d && warm_rows_ == m && warm_x_.size() == d) {
    x = warm_x_;
  }
  if (!repair_feasibility(p, x, feas_tol)) {
    result.x = x;
    result.status = QpStatus::Infeasible;
    return result;
  }
  // Equality rows stay in the working set for the whole solve. Inequality
  // rows are taken from the warm-start set when they are still active at
  // the repaired point.
  for (int i = 0; i < m; ++i) {
    if (p.lower[i] == p.upper[i]) working.push_back({i, 0});
  }
  if (opt.warm_start && warm_dim_ == d && warm_rows_ == m) {
    for (const auto& w : warm_set_) {
      if (w.side == 0) continue;
      const double v = row_value(p, x, w.row);
      const double bound = w.side < 0 ? p.lower[w.row] : p.upper[w.row];
      if (std::isfinite(bound) && std::abs(v - bound) <= 1e-8 * (1.0 + std::abs(bound))) {
        working.push_back({w.row, w.side});
      }
    }
  }

  const double gscale = 1.0 + p.c.cwiseAbs().maxCoeff() + p.Q.cwiseAbs().maxCoeff();
  VecX lambda;  // multipliers of the working set, sign convention: g = Aw' lambda

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    result.iterations = iter + 1;
    const int k = static_cast<int>(working.size());
    const VecX g = p.Q * x + p.c;

    // Equality-constrained subproblem in the null space of the working set.
    MatX Aw(k, d);
    for (int i = 0; i < k; ++i) Aw.row(i) = p.A.row(working[i].row);
    VecX step = VecX::Zero(d);
    Eigen::ColPivHouseholderQR<MatX> qr;
    int rank = 0;
    if (k > 0) {
      qr.compute(Aw.transpose());
      rank = static_cast<int>(qr.rank());
    }
    if (d - rank > 0) {
      MatX Z;
      if (k > 0) {
        const MatX Qfull = qr.householderQ();
        Z = Qfull.rightCols(d - rank);
      } else {
        Z = MatX::Identity(d, d);
      }
      const MatX H = Z.transpose() * p.Q * Z;
      const VecX rhs = -Z.transpose() * g;
      Eigen::LLT<MatX> llt(H);
      VecX pz;
      if (llt.info() == Eigen::Success) {
        pz = llt.solve(rhs);
      } else {
        // PSD-singular reduced Hessian: fall back to a semidefinite solve.
        MatX Hreg = H;
        Hreg.diagonal().array() += 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
        pz = Hreg.ldlt().solve(rhs);
      }
      step = Z * pz;
    }

    if (step.cwiseAbs().maxCoeff() <= opt.tol * gscale) {
      // Stationary on the working set; check multiplier signs.
      bool optimal = true;
      int drop = -1;
      double worst = -opt.tol * gscale;
      if (k > 0) {
        lambda = qr.solve(g);
        for (int i = 0; i < k; ++i) {
          if (working[i].side == 0) continue;  // equality rows keep any sign
          const double signed_mult = working[i].side < 0 ? lambda[i] : -lambda[i];
          if (signed_mult < worst) {
            worst = signed_mult;
            drop = i;
            optimal = false;
          }
        }
      }
      if (optimal) {
        result.x = x;
        result.status = QpStatus::Optimal;
        for (const auto& w : working) result.active_constraints.push_back(w.row);
        std::sort(result.active_constraints.begin(), result.active_constraints.end());
        warm_set_ = working;
        warm_x_ = x;
        warm_dim_ = d;
        warm_rows_ = m;
        return result;
      }
      working.erase(working.begin() + drop);
      continue;
    }

    // Longest feasible step along `step`, blocked by the nearest
    // constraint outside the working set (ties broken by row order).
    double alpha = 1.0;
    int blocking = -1;
    int blocking_side = 0;
    for (int i = 0; i < m; ++i) {
      bool in_working = false;
      for (const auto& w : working) {
        if (w.row == i) {
          in_working = true;
          break;
        }
      }
      if (in_working) continue;
      const double s = p.A.row(i).dot(step);
      const double v = row_value(p, x, i);
      if (s < -1e-14 && std::isfinite(p.lower[i])) {
        const double a = (p.lower[i] - v) / s;
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = -1;
        }
      } else if (s > 1e-14 && std::isfinite(p.upper[i])) {
        const double a = (p.upper[i] - v) / s;
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = +1;
        }
      }
    }
    alpha = std::max(alpha, 0.0);
    x += alpha * step;
    if (blocking >= 0 && alpha < 1.0) {
      working.push_back({blocking, blocking_side});
    }
  }

  result.x = x;
  result.status = QpStatus::MaxIter;
  for (const auto& w : working) result.active_constraints.push_back(w.row);
  std::sort(result.active_constraints.begin(), result.active_constraints.end());
  return result;
}

QpResult solve_qp(const QpProblem& problem, const QpOptions& options) {
  QpSolver solver;
  QpOptions opt = options;
  opt.warm_start = false;
  return solver.solve(problem, opt);
}

}  // namespace rbsim
