#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reconf/formulation.hpp"
#include "reconf/qubo.hpp"
#include "reconf/socp.hpp"

namespace reconf {

struct AdmmParams {
  double rho = 10.0;
  int max_outer_iters = 100;
  /// Stop once max_i |u_i - y_i| falls to this value.
  double eps_residual = 1e-4;
  double threshold = 0.5;
  QuboMethod qubo_backend = QuboMethod::exhaustive;
  std::uint64_t seed = 0;
  AnnealSchedule anneal;
  int anneal_restarts = 10;
  /// Its seed is ignored; every QUBO step derives one from `seed`.
  QaoaParams qaoa;
  SolverSettings socp;

  void validate() const;
};

struct AdmmIteration {
  int iteration = 0;
  double primal_residual = 0.0;  // max |u - y|
  double dual_residual = 0.0;    // rho * ||y - y_prev||
  double objective = 0.0;        // c'x of the continuous step, penalty excluded
};

struct AdmmResult {
  SolveStatus status = SolveStatus::iteration_limit;
  SwitchAssignment assignment;
  FlowSolution flow;
  std::vector<AdmmIteration> trace;
  bool converged = false;
  int iterations = 0;
  /// y rounded at the threshold, before any feasibility repair.
  SwitchAssignment rounded;
  bool used_fallback = false;
  /// Objective of the continuous relaxation; a lower bound on flow.objective.
  double relaxation_objective = 0.0;
};

/// (rho/2) ||u - t||^2 with t = y - lambda/rho, expanded over binary u.
Qubo build_step_qubo(const Vector& y, const Vector& lambda, double rho);

/// Dispatches to the selected backend.
QuboSolution solve_qubo(const Qubo& q, QuboMethod method, const AdmmParams& params, std::uint64_t seed);

AdmmResult solve_admm(const MicpModel& model, const AdmmParams& params = {});

/// iteration,primal_residual,dual_residual,objective
std::string trace_to_csv(const std::vector<AdmmIteration>& trace);

}  // namespace reconf
