#pragma once

#include <vector>

#include "rbsim/math.hpp"

namespace rbsim {

/// Dense convex quadratic program
///   minimize    0.5 x'Qx + c'x
///   subject to  lower <= A x <= upper   (entries may be +-inf;
///                                        lower == upper is an equality)
struct QpProblem {
  MatX Q;  // d x d, symmetric positive semidefinite
  VecX c;  // d
  MatX A;  // m x d
  VecX lower;  // m
  VecX upper;  // m

  int dim() const { return static_cast<int>(c.size()); }
  int rows() const { return static_cast<int>(lower.size()); }
};

enum class QpStatus { Optimal, MaxIter, Infeasible };

struct QpOptions {
  int max_iter = 200;
  double tol = 1e-9;
  bool warm_start = true;
};

struct QpResult {
  VecX x;
  QpStatus status = QpStatus::MaxIter;
  std::vector<int> active_constraints;  // rows in the final working set
  int iterations = 0;
};

/// Primal active-set solver for small dense QPs. Steps stay primal
/// feasible; each subproblem is solved in the null space of the working
/// set with a Cholesky factorization of the reduced Hessian.
///
/// A solver instance remembers its last working set and reuses it when the
/// next problem has the same shape (contact active sets change rarely
/// between simulation steps, so this usually converges in one or two
/// iterations). Instances are single-owner; distinct instances may run
/// concurrently.
class QpSolver {
 public:
  /// Throws BadProblem on an asymmetric Q or lower > upper. Infeasible
  /// constraint systems are reported through the status, never clamped.
  QpResult solve(const QpProblem& problem, const QpOptions& options = {});

  /// Drops the warm-start memory.
  void reset();

 private:
  struct WorkingConstraint {
    int row;
    int side;  // -1 at lower bound, +1 at upper bound, 0 equality
  };

  std::vector<WorkingConstraint> warm_set_;
  VecX warm_x_;
  int warm_dim_ = -1;
  int warm_rows_ = -1;
};

/// One-shot convenience wrapper (no warm start).
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace rbsim
