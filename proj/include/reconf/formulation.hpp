#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "reconf/conic_program.hpp"
#include "reconf/network.hpp"

namespace reconf {

enum class ModelKind { branch_flow, bus_injection };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);  // "bf" | "bi" | long names

/// Physical quantities housed in a model. Per-line symbols are keyed by line id,
/// per-bus symbols by bus id, and the grid totals by 0.
enum class Symbol {
  nu,           // squared bus voltage
  nu_from,      // squared voltage of the from bus as seen by the line (zero when open)
  nu_to,
  isq,          // squared line current
  p_ij,         // real flow leaving the from bus
  q_ij,
  p_ji,         // real flow leaving the to bus (bus-injection only)
  q_ji,
  r_aux,        // V_i V_j cos(theta_ij) (bus-injection only)
  t_aux,        // V_i V_j sin(theta_ij) (bus-injection only)
  beta_ij,      // 1 when the to bus is the parent of the from bus
  beta_ji,      // 1 when the from bus is the parent of the to bus
  p_served,
  p_curtailed,
  q_served,
  q_curtailed,
  p_grid,
  q_grid,
  alpha,        // switch closed
};

struct VarKey {
  Symbol symbol;
  int id = 0;
  auto operator<=>(const VarKey&) const = default;
};

class VarMap {
 public:
  void insert(Symbol s, int id, Index var);
  Index at(Symbol s, int id = 0) const;
  bool contains(Symbol s, int id = 0) const { return map_.count({s, id}) != 0; }
  std::size_t count(Symbol s) const;
  std::size_t size() const { return map_.size(); }
  const std::map<VarKey, Index>& entries() const { return map_; }

 private:
  std::map<VarKey, Index> map_;
};

struct MicpModel {
  ConicProgram program;
  /// alpha variables, in ascending switch id order.
  std::vector<Index> binary_vars;
  std::vector<int> binary_switch_ids;
  VarMap var_map;
  ModelKind kind = ModelKind::branch_flow;
  double voll = 1000.0;
  Network network;
  FaultScenario scenario;
};

constexpr double kDefaultVoll = 1000.0;

/// Branch-flow (DistFlow) reconfiguration model with SOC-relaxed current definition.
MicpModel build_branch_flow(const Network& network, const FaultScenario& scenario, double voll = kDefaultVoll);

/// Bus-injection reconfiguration model in the (R, T) auxiliary variables.
MicpModel build_bus_injection(const Network& network, const FaultScenario& scenario, double voll = kDefaultVoll);

MicpModel build_model(ModelKind kind, const Network& network, const FaultScenario& scenario,
                      double voll = kDefaultVoll);

/// Substitutes each alpha by its assigned constant (the variable stays, boxed at its value).
ConicProgram fix_binaries(const MicpModel& model, const SwitchAssignment& assignment);

/// Drops integrality: every alpha is a continuous variable in [0, 1].
ConicProgram relax_binaries(const MicpModel& model);

struct BusFlow {
  int id = 0;
  double nu = 0.0;
  double p_served = 0.0;
  double p_curtailed = 0.0;
  double q_served = 0.0;
  double q_curtailed = 0.0;
  double voltage() const;
};

struct LineFlow {
  int id = 0;
  bool closed = false;
  double p = 0.0;  // from -> to
  double q = 0.0;
  double p_reverse = 0.0;  // to -> from; bus-injection only, zero otherwise
  double q_reverse = 0.0;
  double isq = 0.0;
  double beta_ij = 0.0;
  double beta_ji = 0.0;
  double nu_from = 0.0;
  double nu_to = 0.0;
  double r_aux = 0.0;
  double t_aux = 0.0;
  double current() const;
};

struct FlowSolution {
  ModelKind kind = ModelKind::branch_flow;
  std::vector<BusFlow> buses;
  std::vector<LineFlow> lines;
  double p_grid = 0.0;
  double q_grid = 0.0;
  /// c'x of the solver vector.
  double objective = 0.0;
  /// p_grid + voll * total curtailed real power, recomputed from the decoded quantities.
  double physical_objective = 0.0;
  SwitchAssignment assignment;

  double total_curtailed() const;
};

FlowSolution extract_solution(const MicpModel& model, const Vector& x, const SwitchAssignment& assignment);

/// Largest gap of the relaxed cone on closed lines; 0 when no line is closed.
double cone_exactness(const MicpModel& model, const FlowSolution& solution);

/// Human-readable list of violated physical invariants (empty when valid).
std::vector<std::string> check_solution(const Network& network, const FlowSolution& solution, double tol = 1e-6);

}  // namespace reconf
