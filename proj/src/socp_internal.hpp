#pragma once

#include <limits>
#include <vector>

#include "reconf/socp.hpp"

namespace reconf::detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reduced problem in constraint form: z = A x, z in C.

struct ConeBlock {
  Index start = 0;
  Index size = 0;
  Vector shift;  // C_block = shift + SOC
};

struct Reduced {
  Index n = 0;
  Index m = 0;
  SparseMatrix A;
  Vector c;
  Vector lower;  // interval rows (cone rows hold -inf/+inf placeholders)
  Vector upper;
  std::vector<ConeBlock> cones;
  std::vector<char> in_cone;
  std::vector<Index> var_of;            // reduced -> original variable
  std::vector<Index> eq_row_of;         // reduced row -> original equality row, or -1
  double objective_offset = 0.0;
};

struct Scaling {
  Vector D;  // x = D x_hat
  Vector E;  // z_hat = E z
  double cost = 1.0;
};

/// Primal-dual interior-point solve of the scaled reduced problem. On return
/// x_hat and y_hat hold the scaled iterate, with y_hat in the convention
/// c + A'y = 0 of the constraint form.
SocpSolution solve_interior_point(const Reduced& red, const Scaling& scaling, const SolverSettings& settings,
                                  Vector& x_hat, Vector& y_hat);

}  // namespace reconf::detail
