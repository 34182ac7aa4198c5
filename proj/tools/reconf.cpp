// reconf: command-line front end for the reconfiguration solvers.
//
//   reconf solve   --network F --scenario F... [--model bf|bi|both] [--solver exact|admm] ...
//   reconf compare --network F --scenario F... --solver exact-bf exact-bi admm ...
//
// Exit codes: 0 optimal, 1 usage/input/output error, 2 infeasible, 3 iteration limit.
// With several runs the most severe outcome wins (1 over 2 over 3 over 0).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "reconf/exact.hpp"
#include "reconf/mbadmm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace reconf;

namespace {

constexpr int kSchemaVersion = 1;

enum Exit { kOk = 0, kError = 1, kInfeasible = 2, kIterationLimit = 3 };

int severity(int code) {
  switch (code) {
    case kError: return 3;
    case kInfeasible: return 2;
    case kIterationLimit: return 1;
    default: return 0;
  }
}

int worst(int a, int b) { return severity(a) >= severity(b) ? a : b; }

int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return kOk;
    case SolveStatus::iteration_limit: return kIterationLimit;
    default: return kInfeasible;
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write file: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string bits_of(const SwitchAssignment& a) {
  std::string s;
  for (const auto& [id, closed] : a) s += closed ? '1' : '0';
  return s;
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

struct Config {
  std::string network_path;
  std::vector<std::string> scenario_paths;
  std::string model = "bf";
  std::string solver = "exact";
  std::vector<std::string> solvers;
  std::string qubo = "exhaustive";
  double voll = kDefaultVoll;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "out";
  double rho = AdmmParams{}.rho;
  int max_outer = AdmmParams{}.max_outer_iters;
  bool timings = false;
};

struct Inputs {
  Network network;
  std::vector<FaultScenario> scenarios;
};

Inputs load_inputs(const Config& cfg) {
  Inputs in;
  if (!fs::exists(cfg.network_path)) throw std::runtime_error("network file does not exist: " + cfg.network_path);
  in.network = load_network_file(cfg.network_path);
  std::set<std::string> names;
  for (const std::string& p : cfg.scenario_paths) {
    if (!fs::exists(p)) throw std::runtime_error("scenario file does not exist: " + p);
    FaultScenario s = load_scenario_file(p);
    validate_scenario(in.network, s);
    if (s.name.empty()) s.name = fs::path(p).stem().string();
    if (!names.insert(s.name).second) throw std::runtime_error("duplicate scenario name: " + s.name);
    in.scenarios.push_back(std::move(s));
  }
  if (cfg.voll <= 0) throw std::runtime_error("--voll must be positive");
  if (cfg.jobs < 1) throw std::runtime_error("--jobs must be >= 1");
  return in;
}

// Outcome of one (scenario, model, solver) run.
struct Run {
  std::string scenario;
  ModelKind kind = ModelKind::branch_flow;
  std::string solver;
  SolveStatus status = SolveStatus::iteration_limit;
  SwitchAssignment assignment;
  FlowSolution flow;
  bool has_flow = false;
  double exactness = 0.0;
  double seconds = 0.0;
  std::optional<EnumerationReport> report;
  std::optional<AdmmResult> admm;
};

Run run_exact(const Network& net, const FaultScenario& sc, ModelKind kind, const Config& cfg,
              const SolverSettings& settings, int threads) {
  Run r;
  r.scenario = sc.name;
  r.kind = kind;
  r.solver = "exact";
  const auto t0 = std::chrono::steady_clock::now();
  EnumerationReport rep = solve_enumeration(net, sc, kind, cfg.voll, settings, threads);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (rep.best) {
    const EnumerationRow& b = rep.best_row();
    r.status = SolveStatus::optimal;
    r.assignment = b.assignment;
    r.flow = b.flow;
    r.exactness = b.exactness;
    r.has_flow = true;
  } else {
    const bool any_limit = std::any_of(rep.rows.begin(), rep.rows.end(),
                                       [](const EnumerationRow& x) { return x.status == SolveStatus::iteration_limit; });
    r.status = any_limit ? SolveStatus::iteration_limit : SolveStatus::infeasible;
  }
  r.report = std::move(rep);
  return r;
}

Run run_admm(const Network& net, const FaultScenario& sc, ModelKind kind, const Config& cfg,
             const SolverSettings& settings) {
  Run r;
  r.scenario = sc.name;
  r.kind = kind;
  r.solver = "admm";
  AdmmParams params;
  params.rho = cfg.rho;
  params.max_outer_iters = cfg.max_outer;
  params.qubo_backend = parse_qubo_method(cfg.qubo);
  params.seed = cfg.seed;
  params.socp = settings;
  const auto t0 = std::chrono::steady_clock::now();
  const MicpModel model = build_model(kind, net, sc, cfg.voll);
  AdmmResult res = solve_admm(model, params);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.status = res.status;
  r.assignment = res.assignment;
  if (res.status == SolveStatus::optimal || res.status == SolveStatus::iteration_limit) {
    if (!res.flow.buses.empty()) {
      r.flow = res.flow;
      r.has_flow = true;
      r.exactness = cone_exactness(model, r.flow);
    }
  }
  r.admm = std::move(res);
  return r;
}

json result_document(const Run& r, const Network& net) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["scenario"] = r.scenario;
  j["model"] = to_string(r.kind);
  j["solver"] = r.solver;
  j["status"] = to_string(r.status);
  json a = json::object();
  for (const auto& [id, closed] : r.assignment) a[std::to_string(id)] = closed;
  j["assignment"] = a;
  if (r.has_flow) {
    j["objective"] = r.flow.objective;
    j["p_grid"] = r.flow.p_grid;
    j["q_grid"] = r.flow.q_grid;
    j["total_curtailed"] = r.flow.total_curtailed();
    j["cone_exactness"] = r.exactness;
    json buses = json::array();
    for (const BusFlow& b : r.flow.buses) {
      const Bus& source = net.bus(b.id);
      buses.push_back({{"id", b.id},
                       {"v", b.voltage()},
                       {"p_demand", source.p_demand},
                       {"q_demand", source.q_demand},
                       {"p_served", b.p_served},
                       {"q_served", b.q_served},
                       {"p_curtailed", b.p_curtailed},
                       {"q_curtailed", b.q_curtailed}});
    }
    j["buses"] = buses;
    json lines = json::array();
    for (const LineFlow& l : r.flow.lines)
      lines.push_back({{"id", l.id}, {"closed", l.closed}, {"i", l.current()}, {"p", l.p}, {"q", l.q}});
    j["lines"] = lines;
  }
  if (r.report) {
    const EnumerationReport& rep = *r.report;
    j["enumerated"] = rep.rows.size();
    j["empty"] = rep.empty;
    j["inexact_rows"] = std::count_if(rep.rows.begin(), rep.rows.end(), [](const EnumerationRow& x) { return x.inexact; });
  }
  if (r.admm) {
    const AdmmResult& res = *r.admm;
    j["converged"] = res.converged;
    j["iterations"] = res.iterations;
    j["used_fallback"] = res.used_fallback;
    j["rounded"] = bits_of(res.rounded);
    j["relaxation_objective"] = res.relaxation_objective;
  }
  return j;
}

std::string voltage_csv(const FlowSolution& f) {
  std::ostringstream out;
  out << "bus,v_pu,p_curtailed_pu,q_curtailed_pu\n";
  for (const BusFlow& b : f.buses)
    out << b.id << ',' << fmt(b.voltage()) << ',' << fmt(b.p_curtailed) << ',' << fmt(b.q_curtailed) << '\n';
  return out.str();
}

std::string current_csv(const FlowSolution& f) {
  std::ostringstream out;
  out << "line,closed,i_pu\n";
  for (const LineFlow& l : f.lines) out << l.id << ',' << (l.closed ? 1 : 0) << ',' << fmt(l.current()) << '\n';
  return out.str();
}

std::string model_tag(ModelKind k) { return k == ModelKind::branch_flow ? "bf" : "bi"; }

void write_run(const Run& r, const Network& net, const fs::path& dir) {
  const std::string tag = model_tag(r.kind);
  write_atomic(dir / ("result_" + tag + ".json"), result_document(r, net).dump(2) + "\n");
  if (r.has_flow) {
    write_atomic(dir / ("voltage_" + tag + ".csv"), voltage_csv(r.flow));
    write_atomic(dir / ("current_" + tag + ".csv"), current_csv(r.flow));
  }
  if (r.report) write_atomic(dir / ("enumeration_" + tag + ".csv"), report_to_csv(*r.report));
  if (r.admm) write_atomic(dir / ("trace_" + tag + ".csv"), trace_to_csv(r.admm->trace));
}

struct Deviation {
  double v = 0.0;
  double i = 0.0;
};

Deviation deviation(const FlowSolution& a, const FlowSolution& b) {
  Deviation d;
  for (std::size_t k = 0; k < a.buses.size() && k < b.buses.size(); ++k)
    d.v = std::max(d.v, std::abs(a.buses[k].voltage() - b.buses[k].voltage()));
  for (std::size_t k = 0; k < a.lines.size() && k < b.lines.size(); ++k)
    d.i = std::max(d.i, std::abs(a.lines[k].current() - b.lines[k].current()));
  return d;
}

std::string diff_csv(const Run& bf, const Run& bi) {
  std::ostringstream out;
  out << "kind,id,bf,bi,abs_diff\n";
  for (std::size_t k = 0; k < bf.flow.buses.size(); ++k) {
    const double a = bf.flow.buses[k].voltage(), b = bi.flow.buses[k].voltage();
    out << "v," << bf.flow.buses[k].id << ',' << fmt(a) << ',' << fmt(b) << ',' << fmt(std::abs(a - b)) << '\n';
  }
  for (std::size_t k = 0; k < bf.flow.lines.size(); ++k) {
    const double a = bf.flow.lines[k].current(), b = bi.flow.lines[k].current();
    out << "i," << bf.flow.lines[k].id << ',' << fmt(a) << ',' << fmt(b) << ',' << fmt(std::abs(a - b)) << '\n';
  }
  const Deviation d = deviation(bf.flow, bi.flow);
  out << "max_v,," << ",," << fmt(d.v) << '\n';
  out << "max_i,," << ",," << fmt(d.i) << '\n';
  out << "assignment_match,,,," << (bf.assignment == bi.assignment ? 1 : 0) << '\n';
  return out.str();
}

// Runs tasks on at most `jobs` threads; results land at their task index.
void run_parallel(std::size_t n, int jobs, const std::function<void(std::size_t)>& task) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto work = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
}

struct Task {
  std::size_t scenario;
  ModelKind kind;
  std::string solver;  // exact | admm
};

std::vector<Run> execute(const Inputs& in, const std::vector<Task>& tasks, const Config& cfg) {
  const SolverSettings settings = settings_from_environment();
  std::vector<Run> runs(tasks.size());
  const int outer = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), tasks.size()));
  const int inner = std::max(1, cfg.jobs / std::max(outer, 1));
  run_parallel(tasks.size(), cfg.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const FaultScenario& sc = in.scenarios[t.scenario];
    runs[i] = t.solver == "exact" ? run_exact(in.network, sc, t.kind, cfg, settings, inner)
                                  : run_admm(in.network, sc, t.kind, cfg, settings);
  });
  return runs;
}

std::vector<ModelKind> models_of(const std::string& m) {
  if (m == "both") return {ModelKind::branch_flow, ModelKind::bus_injection};
  return {parse_model_kind(m)};
}

int cmd_solve(const Config& cfg) {
  const Inputs in = load_inputs(cfg);
  if (cfg.solver != "exact" && cfg.solver != "admm") throw std::runtime_error("--solver must be exact or admm");
  parse_qubo_method(cfg.qubo);
  const std::vector<ModelKind> kinds = models_of(cfg.model);
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < in.scenarios.size(); ++s)
    for (ModelKind k : kinds) tasks.push_back({s, k, cfg.solver});
  const std::vector<Run> runs = execute(in, tasks, cfg);

  int code = kOk;
  for (std::size_t s = 0; s < in.scenarios.size(); ++s) {
    const fs::path dir = fs::path(cfg.out) / in.scenarios[s].name;
    const Run* per_kind[2] = {nullptr, nullptr};
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].scenario != s) continue;
      const Run& r = runs[t];
      write_run(r, in.network, dir);
      per_kind[r.kind == ModelKind::branch_flow ? 0 : 1] = &r;
      code = worst(code, exit_code(r.status));
      std::cout << r.scenario << ' ' << model_tag(r.kind) << ' ' << r.solver << ' ' << to_string(r.status);
      if (r.has_flow) std::cout << " objective=" << fmt(r.flow.objective) << " assignment=" << bits_of(r.assignment);
      if (r.report && std::any_of(r.report->rows.begin(), r.report->rows.end(),
                                  [](const EnumerationRow& x) { return x.inexact; }))
        std::cout << " [inexact relaxation rows present]";
      std::cout << '\n';
    }
    if (kinds.size() == 2 && per_kind[0]->has_flow && per_kind[1]->has_flow)
      write_atomic(dir / "diff.csv", diff_csv(*per_kind[0], *per_kind[1]));
  }
  return code;
}

int cmd_compare(const Config& cfg) {
  std::vector<std::string> solvers = cfg.solvers;
  for (const std::string& s : solvers)
    if (s != "exact-bf" && s != "exact-bi" && s != "admm")
      throw std::invalid_argument("unknown solver '" + s + "' (expected exact-bf, exact-bi or admm)");
  std::sort(solvers.begin(), solvers.end());
  solvers.erase(std::unique(solvers.begin(), solvers.end()), solvers.end());
  if (solvers.size() < 2) throw std::invalid_argument("compare needs at least two distinct solvers");
  const Inputs in = load_inputs(cfg);
  parse_qubo_method(cfg.qubo);
  const ModelKind admm_kind = cfg.model == "bi" ? ModelKind::bus_injection : ModelKind::branch_flow;

  // The exact-bf reference is always computed; it is reported only when requested.
  const std::vector<std::string> order = {"exact-bf", "exact-bi", "admm"};
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < in.scenarios.size(); ++s)
    for (const std::string& name : order) {
      if (name != "exact-bf" && std::find(solvers.begin(), solvers.end(), name) == solvers.end()) continue;
      if (name == "exact-bf") tasks.push_back({s, ModelKind::branch_flow, "exact"});
      if (name == "exact-bi") tasks.push_back({s, ModelKind::bus_injection, "exact"});
      if (name == "admm") tasks.push_back({s, admm_kind, "admm"});
    }
  const std::vector<Run> runs = execute(in, tasks, cfg);

  auto label = [](const Run& r) {
    return r.solver == "admm" ? std::string("admm") : "exact-" + model_tag(r.kind);
  };
  std::ostringstream table, timing;
  table << "scenario,solver,status,assignment,objective,max_v_dev_pu,max_i_dev_pu,match,hamming\n";
  timing << "scenario,solver,seconds\n";
  int code = kOk;
  std::cout << std::left << std::setw(14) << "scenario" << std::setw(10) << "solver" << std::setw(12) << "assignment"
            << std::setw(16) << "objective" << std::setw(10) << "seconds" << std::setw(12) << "max dV" << "flag\n";
  for (std::size_t s = 0; s < in.scenarios.size(); ++s) {
    const Run* ref = nullptr;
    for (std::size_t t = 0; t < tasks.size(); ++t)
      if (tasks[t].scenario == s && label(runs[t]) == "exact-bf") ref = &runs[t];
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].scenario != s) continue;
      const Run& r = runs[t];
      const std::string name = label(r);
      if (std::find(solvers.begin(), solvers.end(), name) == solvers.end()) continue;
      code = worst(code, exit_code(r.status));
      std::string flag = "n/a", hamming = "";
      Deviation d{std::nan(""), std::nan("")};
      if (ref && ref->has_flow && r.has_flow) {
        const int h = hamming_distance(r.assignment, ref->assignment);
        flag = h == 0 ? "MATCH" : "MISMATCH";
        hamming = std::to_string(h);
        d = deviation(r.flow, ref->flow);
      }
      const std::string objective = r.has_flow ? fmt(r.flow.objective) : "";
      table << r.scenario << ',' << name << ',' << to_string(r.status) << ',' << bits_of(r.assignment) << ','
            << objective << ',' << (r.has_flow && ref && ref->has_flow ? fmt(d.v) : "") << ','
            << (r.has_flow && ref && ref->has_flow ? fmt(d.i) : "") << ',' << flag << ',' << hamming << '\n';
      timing << r.scenario << ',' << name << ',' << fmt(r.seconds) << '\n';
      std::cout << std::setw(14) << r.scenario << std::setw(10) << name << std::setw(12) << bits_of(r.assignment)
                << std::setw(16) << objective << std::setw(10) << std::setprecision(3) << std::fixed << r.seconds
                << std::defaultfloat << std::setprecision(6) << std::setw(12) << d.v << flag;
      if (flag == "MISMATCH") std::cout << " (hamming " << hamming << ")";
      std::cout << '\n';
    }
  }
  write_atomic(fs::path(cfg.out) / "compare.csv", table.str());
  if (cfg.timings) write_atomic(fs::path(cfg.out) / "compare_timings.csv", timing.str());
  return code;
}

void add_common(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--network", cfg.network_path, "feeder document (JSON)")->required();
  cmd->add_option("--scenario", cfg.scenario_paths, "fault scenario document(s)")->required()->expected(1, -1);
  cmd->add_option("--qubo", cfg.qubo, "QUBO backend for admm: exhaustive|sa|qaoa");
  cmd->add_option("--voll", cfg.voll, "value of lost load weight");
  cmd->add_option("--seed", cfg.seed, "seed for every randomized component");
  cmd->add_option("--jobs", cfg.jobs, "worker threads");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--rho", cfg.rho, "admm penalty");
  cmd->add_option("--max-outer", cfg.max_outer, "admm outer iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution network reconfiguration after line faults"};
  app.require_subcommand(1);
  Config cfg;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve scenarios and write profiles");
  add_common(solve_cmd, cfg);
  solve_cmd->add_option("--model", cfg.model, "bf|bi|both");
  solve_cmd->add_option("--solver", cfg.solver, "exact|admm");
  CLI::App* compare_cmd = app.add_subcommand("compare", "compare solvers against the exact branch-flow optimum");
  add_common(compare_cmd, cfg);
  compare_cmd->add_option("--model", cfg.model, "model used by admm: bf|bi");
  compare_cmd->add_option("--solver", cfg.solvers, "two or more of exact-bf, exact-bi, admm")->expected(1, -1);
  compare_cmd->add_flag("--timings", cfg.timings, "also write compare_timings.csv (varies between runs)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kError;
  }
  try {
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    return cmd_compare(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
}
