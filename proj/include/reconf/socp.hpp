#pragma once

#include <iosfwd>
#include <string>

#include "reconf/conic_program.hpp"

namespace reconf {

enum class SolverMethod { interior_point, operator_splitting };

std::string to_string(SolverMethod method);

struct SolverSettings {
  SolverMethod method = SolverMethod::interior_point;
  double eps_primal = 1e-7;
  double eps_dual = 1e-7;
  /// Relative duality gap tolerance: |pobj - dobj| <= eps_gap (1 + |pobj| + |dobj|).
  double eps_gap = 1e-7;
  /// Iteration cap; the interior-point method additionally stops at kMaxInteriorPointIters.
  int max_iters = 100000;
  double over_relaxation = 1.6;
  bool scaling = true;
  int scaling_passes = 25;
  double step_rho = 1.0;
  bool adaptive_rho = true;
  double eps_infeasible = 1e-9;
  int check_every = 10;
  /// When set, one CSV row per residual check: iter,primal_residual,dual_residual,gap,parameter
  /// where parameter is the penalty rho (operator splitting) or the barrier mu (interior point).
  std::ostream* trace = nullptr;
};

constexpr int kMaxInteriorPointIters = 200;

/// RECONF_EPS_PRIMAL, RECONF_EPS_DUAL, RECONF_EPS_GAP, RECONF_MAX_ITERS override the given values.
SolverSettings settings_from_environment(SolverSettings base = {});

enum class SolveStatus { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(SolveStatus status);

struct SocpSolution {
  SolveStatus status = SolveStatus::iteration_limit;
  Vector x;
  /// Multipliers of the program's equality rows (zero for rows removed in presolve).
  Vector y;
  double objective = 0.0;
  /// Residuals relative to (1 + size of the data they compare against); status
  /// optimal means each is at most its tolerance.
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double duality_gap = 0.0;
  int iters = 0;
};

/// Solves a continuous conic program. `initial_x` seeds the operator-splitting
/// iterate and is ignored by the interior-point method.
///
/// Fixed variables (equal bounds, singleton rows, sign-definite rows over
/// nonnegative variables with zero right-hand side, cones whose head is pinned
/// at zero) are eliminated exactly before iterating. The remaining problem is
/// Ruiz-equilibrated and handed to either a homogeneous primal-dual
/// interior-point method with Nesterov-Todd scaling, or to ADMM on the
/// constraint form A x in C. Both factor a quasi-definite KKT matrix with a
/// sparse LDL' decomposition.
SocpSolution solve(const ConicProgram& program, const SolverSettings& settings = {},
                   const Vector* initial_x = nullptr);

}  // namespace reconf
