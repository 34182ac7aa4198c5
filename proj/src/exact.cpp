#include "reconf/exact.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace reconf {

namespace {

EnumerationRow solve_row(const MicpModel& model, const SwitchAssignment& a, const SolverSettings& settings) {
  EnumerationRow row;
  row.assignment = a;
  const SocpSolution s = solve(fix_binaries(model, a), settings);
  row.status = s.status;
  row.iters = s.iters;
  if (s.status == SolveStatus::infeasible || s.status == SolveStatus::unbounded) {
    row.objective = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  row.objective = s.objective;
  row.flow = extract_solution(model, s.x, a);
  row.curtailed = row.flow.total_curtailed();
  row.exactness = cone_exactness(model, row.flow);
  row.inexact = row.exactness > kExactnessFlag;
  return row;
}

std::string assignment_bits(const SwitchAssignment& a) {
  std::string s;
  for (const auto& [id, closed] : a) s += closed ? '1' : '0';
  return s;
}

}  // namespace

const EnumerationRow& EnumerationReport::best_row() const {
  if (!best) throw std::logic_error("enumeration report has no optimal row");
  return rows[*best];
}

EnumerationReport solve_enumeration(const Network& network, const FaultScenario& scenario, ModelKind kind,
                                    double voll, const SolverSettings& settings, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  if (static_cast<int>(network.switch_ids().size()) > kMaxEnumerationSwitches)
    throw std::invalid_argument("enumeration supports at most " + std::to_string(kMaxEnumerationSwitches) +
                                " switchable lines");
  EnumerationReport report;
  report.kind = kind;
  report.scenario = scenario.name;
  const std::vector<SwitchAssignment> radial = enumerate_radial_configs(network, scenario);
  report.empty = radial.empty();
  if (!report.empty) {
    const MicpModel model = build_model(kind, network, scenario, voll);
    std::vector<EnumerationRow> rows(radial.size());
    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(radial.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
      for (std::size_t i; (i = next++) < radial.size();) {
        try {
          rows[i] = solve_row(model, radial[i], settings);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const bool oa = rows[a].status == SolveStatus::optimal, ob = rows[b].status == SolveStatus::optimal;
      if (oa != ob) return oa;
      const bool fa = std::isfinite(rows[a].objective), fb = std::isfinite(rows[b].objective);
      if (fa != fb) return fa;
      return fa && rows[a].objective < rows[b].objective;
    });
    for (std::size_t i : order) report.rows.push_back(std::move(rows[i]));
    if (report.rows.front().status == SolveStatus::optimal) report.best = 0;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string report_to_csv(const EnumerationReport& report) {
  std::ostringstream out;
  out << "rank,assignment,status,objective,curtailed,exactness,inexact,iters\n" << std::setprecision(12);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const EnumerationRow& r = report.rows[i];
    out << i << ',' << assignment_bits(r.assignment) << ',' << to_string(r.status) << ',' << r.objective << ','
        << r.curtailed << ',' << r.exactness << ',' << (r.inexact ? 1 : 0) << ',' << r.iters << '\n';
  }
  return out.str();
}

std::string report_to_json(const EnumerationReport& report, bool include_timing) {
  nlohmann::ordered_json j;
  j["model"] = to_string(report.kind);
  j["scenario"] = report.scenario;
  j["empty"] = report.empty;
  j["best"] = report.best ? nlohmann::ordered_json(*report.best) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const EnumerationRow& r : report.rows) {
    nlohmann::ordered_json row;
    nlohmann::ordered_json a = nlohmann::ordered_json::object();
    for (const auto& [id, closed] : r.assignment) a[std::to_string(id)] = closed;
    row["assignment"] = a;
    row["status"] = to_string(r.status);
    row["objective"] = std::isfinite(r.objective) ? nlohmann::ordered_json(r.objective) : nlohmann::ordered_json(nullptr);
    row["curtailed"] = r.curtailed;
    row["exactness"] = r.exactness;
    row["inexact"] = r.inexact;
    row["iters"] = r.iters;
    rows.push_back(row);
  }
  j["rows"] = rows;
  if (include_timing) j["wall_seconds"] = report.wall_seconds;
  return j.dump(2) + "\n";
}

}  // namespace reconf
