#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reconf/formulation.hpp"
#include "reconf/socp.hpp"

namespace reconf {

constexpr int kMaxEnumerationSwitches = 12;
/// Rows whose relaxed cones are slacker than this are flagged, not dropped.
constexpr double kExactnessFlag = 1e-4;

struct EnumerationRow {
  SwitchAssignment assignment;
  SolveStatus status = SolveStatus::iteration_limit;
  double objective = 0.0;
  double curtailed = 0.0;
  double exactness = 0.0;
  bool inexact = false;
  int iters = 0;
  FlowSolution flow;  // empty for infeasible rows
};

struct EnumerationReport {
  ModelKind kind = ModelKind::branch_flow;
  std::string scenario;
  /// Optimal rows by objective, then the rest; ties keep enumeration order.
  std::vector<EnumerationRow> rows;
  std::optional<std::size_t> best;
  /// No radial assignment exists for the scenario.
  bool empty = false;
  double wall_seconds = 0.0;

  const EnumerationRow& best_row() const;
};

/// Solves every radial switch assignment. jobs <= 0 uses the hardware thread count.
EnumerationReport solve_enumeration(const Network& network, const FaultScenario& scenario, ModelKind kind,
                                    double voll = kDefaultVoll, const SolverSettings& settings = {}, int jobs = 0);

/// rank,assignment,status,objective,curtailed,exactness,inexact,iters
std::string report_to_csv(const EnumerationReport& report);
/// Wall time is left out unless asked for, so the document is reproducible.
std::string report_to_json(const EnumerationReport& report, bool include_timing = false);

}  // namespace reconf
