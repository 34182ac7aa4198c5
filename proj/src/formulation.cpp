#include "reconf/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace reconf {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::branch_flow ? "branch-flow" : "bus-injection";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "bf" || text == "branch-flow") return ModelKind::branch_flow;
  if (text == "bi" || text == "bus-injection") return ModelKind::bus_injection;
  throw std::invalid_argument("unknown model kind: " + text);
}

void VarMap::insert(Symbol s, int id, Index var) {
  if (!map_.emplace(VarKey{s, id}, var).second) throw std::logic_error("duplicate variable key");
}

Index VarMap::at(Symbol s, int id) const {
  auto it = map_.find({s, id});
  if (it == map_.end()) throw std::out_of_range("variable not housed in this model");
  return it->second;
}

std::size_t VarMap::count(Symbol s) const {
  return static_cast<std::size_t>(
      std::count_if(map_.begin(), map_.end(), [s](const auto& kv) { return kv.first.symbol == s; }));
}

namespace {

class ModelBuilder {
 public:
  ModelBuilder(ModelKind kind, const Network& network, const FaultScenario& scenario, double voll)
      : net_(network), scenario_(scenario) {
    if (!(voll > 0)) throw std::invalid_argument("voll must be positive");
    validate_scenario(network, scenario);
    model_.kind = kind;
    model_.voll = voll;
    model_.network = network;
    model_.scenario = scenario;
  }

  MicpModel build() {
    add_grid_and_buses();
    add_switches();
    for (const Line& l : net_.lines()) {
      add_status_coupling(l);
      add_radiality_line(l);
      if (model_.kind == ModelKind::branch_flow) {
        add_branch_flow_line(l);
      } else {
        add_bus_injection_line(l);
      }
    }
    add_radiality_buses();
    add_balances();
    model_.program = pb_.build();
    return std::move(model_);
  }

 private:
  Index var(Symbol s, int id, Index v) {
    model_.var_map.insert(s, id, v);
    return v;
  }
  Index at(Symbol s, int id = 0) const { return model_.var_map.at(s, id); }

  void add_grid_and_buses() {
    var(Symbol::p_grid, 0, pb_.add_variable(1.0));
    var(Symbol::q_grid, 0, pb_.add_variable());
    for (const Bus& b : net_.buses()) {
      const Index nu = var(Symbol::nu, b.id, pb_.add_boxed(b.v_min * b.v_min, b.v_max * b.v_max));
      const Index ps = var(Symbol::p_served, b.id, pb_.add_nonneg());
      const Index pc = var(Symbol::p_curtailed, b.id, pb_.add_nonneg(b.is_substation ? 0.0 : model_.voll));
      const Index qs = var(Symbol::q_served, b.id, pb_.add_nonneg());
      const Index qc = var(Symbol::q_curtailed, b.id, pb_.add_nonneg());
      pb_.add_equality({{ps, 1.0}, {pc, 1.0}}, b.p_demand);
      pb_.add_equality({{qs, 1.0}, {qc, 1.0}}, b.q_demand);
      if (b.is_substation) pb_.add_equality({{nu, 1.0}}, 1.0);
    }
  }

  void add_switches() {
    for (int id : net_.switch_ids()) {
      const Index a = var(Symbol::alpha, id, pb_.add_boxed(0.0, 1.0));
      model_.binary_vars.push_back(a);
      model_.binary_switch_ids.push_back(id);
    }
  }

  // 0 <= nu_line <= vmax^2 s  and  0 <= nu_bus - nu_line <= vmax^2 (1 - s)
  void couple_endpoint(const Line& l, int bus_id, Index nu_line) {
    const Bus& b = net_.bus(bus_id);
    const double vsq = b.v_max * b.v_max;
    const Index nu_bus = at(Symbol::nu, bus_id);
    if (l.switchable) {
      const Index a = at(Symbol::alpha, l.id);
      pb_.add_box(nu_line, 0.0, vsq);
      const Index slack_on = pb_.add_nonneg();
      pb_.add_equality({{nu_line, 1.0}, {slack_on, 1.0}, {a, -vsq}}, 0.0);
      const Index gap = pb_.add_boxed(0.0, vsq);
      const Index slack_off = pb_.add_nonneg();
      pb_.add_equality({{gap, 1.0}, {slack_off, 1.0}, {a, vsq}}, vsq);
      pb_.add_equality({{gap, 1.0}, {nu_bus, -1.0}, {nu_line, 1.0}}, 0.0);
    } else {
      const double s = scenario_.faulted_lines.count(l.id) ? 0.0 : 1.0;
      pb_.add_box(nu_line, 0.0, vsq * s);
      const Index gap = pb_.add_boxed(0.0, vsq * (1.0 - s));
      pb_.add_equality({{gap, 1.0}, {nu_bus, -1.0}, {nu_line, 1.0}}, 0.0);
    }
  }

  void add_status_coupling(const Line& l) {
    const Index nu_from = var(Symbol::nu_from, l.id, pb_.add_variable());
    const Index nu_to = var(Symbol::nu_to, l.id, pb_.add_variable());
    couple_endpoint(l, l.from_bus, nu_from);
    couple_endpoint(l, l.to_bus, nu_to);
  }

  void add_radiality_line(const Line& l) {
    const bool from_root = net_.bus(l.from_bus).is_substation;
    const bool to_root = net_.bus(l.to_bus).is_substation;
    const Index bij = var(Symbol::beta_ij, l.id, pb_.add_boxed(0.0, from_root ? 0.0 : 1.0));
    const Index bji = var(Symbol::beta_ji, l.id, pb_.add_boxed(0.0, to_root ? 0.0 : 1.0));
    if (l.switchable) {
      pb_.add_equality({{bij, 1.0}, {bji, 1.0}, {at(Symbol::alpha, l.id), -1.0}}, 0.0);
    } else {
      pb_.add_equality({{bij, 1.0}, {bji, 1.0}}, scenario_.faulted_lines.count(l.id) ? 0.0 : 1.0);
    }
  }

  void add_radiality_buses() {
    for (std::size_t k = 0; k < net_.buses().size(); ++k) {
      const Bus& b = net_.buses()[k];
      if (b.is_substation) continue;
      std::vector<std::pair<Index, double>> terms;
      for (std::size_t li : net_.incident_lines(k)) {
        const Line& l = net_.lines()[li];
        terms.emplace_back(at(l.from_bus == b.id ? Symbol::beta_ij : Symbol::beta_ji, l.id), 1.0);
      }
      pb_.add_equality(terms, 1.0);
    }
  }

  void add_branch_flow_line(const Line& l) {
    const Index isq = var(Symbol::isq, l.id, pb_.add_nonneg());
    const Index p = var(Symbol::p_ij, l.id, pb_.add_variable());
    const Index q = var(Symbol::q_ij, l.id, pb_.add_variable());
    // P^2 + Q^2 <= nu_from * isq  as  2 * nu_from * (isq / 2) >= P^2 + Q^2
    const Index half = pb_.add_variable();
    pb_.add_equality({{half, 2.0}, {isq, -1.0}}, 0.0);
    pb_.add_rotated(at(Symbol::nu_from, l.id), half, {p, q});
    pb_.add_equality({{at(Symbol::nu_to, l.id), 1.0},
                      {at(Symbol::nu_from, l.id), -1.0},
                      {p, 2.0 * l.r},
                      {q, 2.0 * l.x},
                      {isq, -l.impedance_sq()}},
                     0.0);
  }

  void add_bus_injection_line(const Line& l) {
    const double r = l.r, x = l.x, zsq = l.impedance_sq();
    const Index nu_i = at(Symbol::nu_from, l.id);
    const Index nu_j = at(Symbol::nu_to, l.id);
    const Index R = var(Symbol::r_aux, l.id, pb_.add_nonneg());
    const Index T = var(Symbol::t_aux, l.id, pb_.add_variable());
    const Index pij = var(Symbol::p_ij, l.id, pb_.add_variable());
    const Index qij = var(Symbol::q_ij, l.id, pb_.add_variable());
    const Index pji = var(Symbol::p_ji, l.id, pb_.add_variable());
    const Index qji = var(Symbol::q_ji, l.id, pb_.add_variable());
    const Index isq = var(Symbol::isq, l.id, pb_.add_nonneg());
    // R^2 + T^2 <= nu_i * nu_j  as  2 * nu_i * (nu_j / 2) >= R^2 + T^2
    const Index half = pb_.add_variable();
    pb_.add_equality({{half, 2.0}, {nu_j, -1.0}}, 0.0);
    pb_.add_rotated(nu_i, half, {R, T});
    const double g = r / zsq, b = x / zsq;
    pb_.add_equality({{pij, 1.0}, {nu_i, -g}, {R, g}, {T, -b}}, 0.0);
    pb_.add_equality({{qij, 1.0}, {nu_i, -b}, {R, b}, {T, g}}, 0.0);
    pb_.add_equality({{pji, 1.0}, {nu_j, -g}, {R, g}, {T, b}}, 0.0);
    pb_.add_equality({{qji, 1.0}, {nu_j, -b}, {R, b}, {T, -g}}, 0.0);
    pb_.add_equality({{isq, 1.0}, {nu_i, -1.0 / zsq}, {nu_j, -1.0 / zsq}, {R, 2.0 / zsq}}, 0.0);
  }

  void add_balances() {
    const bool bf = model_.kind == ModelKind::branch_flow;
    for (std::size_t k = 0; k < net_.buses().size(); ++k) {
      const Bus& b = net_.buses()[k];
      std::vector<std::pair<Index, double>> pt, qt;
      for (std::size_t li : net_.incident_lines(k)) {
        const Line& l = net_.lines()[li];
        const bool outgoing = l.from_bus == b.id;
        if (bf) {
          // sum_in (P - r I) - sum_out P = P_served
          if (outgoing) {
            pt.emplace_back(at(Symbol::p_ij, l.id), -1.0);
            qt.emplace_back(at(Symbol::q_ij, l.id), -1.0);
          } else {
            pt.emplace_back(at(Symbol::p_ij, l.id), 1.0);
            pt.emplace_back(at(Symbol::isq, l.id), -l.r);
            qt.emplace_back(at(Symbol::q_ij, l.id), 1.0);
            qt.emplace_back(at(Symbol::isq, l.id), -l.x);
          }
        } else {
          // P_served + sum of flows leaving the bus = 0
          pt.emplace_back(at(outgoing ? Symbol::p_ij : Symbol::p_ji, l.id), 1.0);
          qt.emplace_back(at(outgoing ? Symbol::q_ij : Symbol::q_ji, l.id), 1.0);
        }
      }
      const double served_sign = bf ? -1.0 : 1.0;
      pt.emplace_back(at(Symbol::p_served, b.id), served_sign);
      qt.emplace_back(at(Symbol::q_served, b.id), served_sign);
      if (b.is_substation) {
        // Grid import enters as an injection at the substation.
        pt.emplace_back(at(Symbol::p_grid), -served_sign);
        qt.emplace_back(at(Symbol::q_grid), -served_sign);
      }
      pb_.add_equality(pt, 0.0);
      pb_.add_equality(qt, 0.0);
    }
  }

  const Network& net_;
  const FaultScenario& scenario_;
  ProgramBuilder pb_;
  MicpModel model_;
};

ConicProgram substitute(const MicpModel& model, const std::vector<double>& values) {
  ConicProgram p = model.program;
  SparseMatrix A = p.eq_matrix;
  for (std::size_t k = 0; k < model.binary_vars.size(); ++k) {
    const Index v = model.binary_vars[k];
    for (SparseMatrix::InnerIterator it(A, v); it; ++it) {
      p.eq_rhs(it.row()) -= it.value() * values[k];
      it.valueRef() = 0.0;
    }
    p.objective(v) = 0.0;
    for (BoxBound& b : p.boxes) {
      if (b.index == v) b.lower = b.upper = values[k];
    }
  }
  A.prune(0.0);
  p.eq_matrix = std::move(A);
  return p;
}

}  // namespace

MicpModel build_branch_flow(const Network& network, const FaultScenario& scenario, double voll) {
  return ModelBuilder(ModelKind::branch_flow, network, scenario, voll).build();
}

MicpModel build_bus_injection(const Network& network, const FaultScenario& scenario, double voll) {
  return ModelBuilder(ModelKind::bus_injection, network, scenario, voll).build();
}

MicpModel build_model(ModelKind kind, const Network& network, const FaultScenario& scenario, double voll) {
  return kind == ModelKind::branch_flow ? build_branch_flow(network, scenario, voll)
                                        : build_bus_injection(network, scenario, voll);
}

ConicProgram fix_binaries(const MicpModel& model, const SwitchAssignment& assignment) {
  std::vector<double> values;
  for (int id : model.binary_switch_ids) {
    auto it = assignment.find(id);
    if (it == assignment.end()) throw ValidationError("assignment is missing switch " + std::to_string(id));
    values.push_back(it->second ? 1.0 : 0.0);
  }
  // Objective contribution of a fixed alpha is zero by construction.
  return substitute(model, values);
}

ConicProgram relax_binaries(const MicpModel& model) { return model.program; }

double BusFlow::voltage() const { return nu > 0 ? std::sqrt(nu) : 0.0; }

double LineFlow::current() const { return isq > 0 ? std::sqrt(isq) : 0.0; }

double FlowSolution::total_curtailed() const {
  double s = 0.0;
  for (const BusFlow& b : buses) s += b.p_curtailed;
  return s;
}

FlowSolution extract_solution(const MicpModel& model, const Vector& x, const SwitchAssignment& assignment) {
  if (x.size() != model.program.n_vars) throw std::invalid_argument("solution vector has wrong length");
  const VarMap& vm = model.var_map;
  const bool bi = model.kind == ModelKind::bus_injection;
  FlowSolution sol;
  sol.kind = model.kind;
  sol.assignment = assignment;
  sol.p_grid = x(vm.at(Symbol::p_grid));
  sol.q_grid = x(vm.at(Symbol::q_grid));
  double curtailed = 0.0;
  for (const Bus& b : model.network.buses()) {
    BusFlow f;
    f.id = b.id;
    f.nu = x(vm.at(Symbol::nu, b.id));
    f.p_served = x(vm.at(Symbol::p_served, b.id));
    f.p_curtailed = x(vm.at(Symbol::p_curtailed, b.id));
    f.q_served = x(vm.at(Symbol::q_served, b.id));
    f.q_curtailed = x(vm.at(Symbol::q_curtailed, b.id));
    if (!b.is_substation) curtailed += f.p_curtailed;
    sol.buses.push_back(f);
  }
  for (const Line& l : model.network.lines()) {
    LineFlow f;
    f.id = l.id;
    if (l.switchable) {
      auto it = assignment.find(l.id);
      f.closed = it != assignment.end() && it->second;
    } else {
      f.closed = !model.scenario.faulted_lines.count(l.id);
    }
    f.p = x(vm.at(Symbol::p_ij, l.id));
    f.q = x(vm.at(Symbol::q_ij, l.id));
    f.isq = x(vm.at(Symbol::isq, l.id));
    f.beta_ij = x(vm.at(Symbol::beta_ij, l.id));
    f.beta_ji = x(vm.at(Symbol::beta_ji, l.id));
    f.nu_from = x(vm.at(Symbol::nu_from, l.id));
    f.nu_to = x(vm.at(Symbol::nu_to, l.id));
    if (bi) {
      f.p_reverse = x(vm.at(Symbol::p_ji, l.id));
      f.q_reverse = x(vm.at(Symbol::q_ji, l.id));
      f.r_aux = x(vm.at(Symbol::r_aux, l.id));
      f.t_aux = x(vm.at(Symbol::t_aux, l.id));
    }
    sol.lines.push_back(f);
  }
  sol.objective = model.program.objective_value(x);
  sol.physical_objective = sol.p_grid + model.voll * curtailed;
  return sol;
}

double cone_exactness(const MicpModel& model, const FlowSolution& solution) {
  double worst = 0.0;
  for (const LineFlow& f : solution.lines) {
    if (!f.closed) continue;
    const double gap = model.kind == ModelKind::branch_flow
                           ? f.p * f.p + f.q * f.q - f.nu_from * f.isq
                           : f.r_aux * f.r_aux + f.t_aux * f.t_aux - f.nu_from * f.nu_to;
    worst = std::max(worst, std::abs(gap));
  }
  return worst;
}

std::vector<std::string> check_solution(const Network& network, const FlowSolution& solution, double tol) {
  std::vector<std::string> issues;
  for (const BusFlow& f : solution.buses) {
    const Bus& b = network.bus(f.id);
    const std::string name = "bus " + std::to_string(f.id);
    if (f.nu < b.v_min * b.v_min - tol || f.nu > b.v_max * b.v_max + tol) issues.push_back(name + ": voltage outside bounds");
    if (std::abs(f.p_served + f.p_curtailed - b.p_demand) > tol) issues.push_back(name + ": real served + curtailed != demand");
    if (std::abs(f.q_served + f.q_curtailed - b.q_demand) > tol)
      issues.push_back(name + ": reactive served + curtailed != demand");
  }
  for (const LineFlow& f : solution.lines) {
    if (f.closed) continue;
    const double flow = std::max({std::abs(f.p), std::abs(f.q), std::abs(f.p_reverse), std::abs(f.q_reverse)});
    if (flow > tol || std::abs(f.isq) > tol)
      issues.push_back("line " + std::to_string(f.id) + ": open line carries flow or current");
  }
  return issues;
}

}  // namespace reconf
