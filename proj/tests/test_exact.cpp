#include <doctest.h>

#include <random>

#include <json.hpp>

#include "oracles.hpp"
#include "reconf/exact.hpp"

using namespace reconf;

namespace {

const Network& ieee33() {
  static const Network net = load_network_file(oracle::data_path("data/ieee33.json"));
  return net;
}

}  // namespace

TEST_CASE("enumeration on the intact feeder") {
  const EnumerationReport rep = solve_enumeration(ieee33(), {}, ModelKind::branch_flow);
  REQUIRE(rep.best);
  CHECK_FALSE(rep.empty);
  CHECK(rep.rows.size() == 1);
  CHECK(rep.best_row().assignment == normal_assignment(ieee33()));
  CHECK(rep.best_row().curtailed == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("enumeration without radial assignments") {
  const EnumerationReport rep = solve_enumeration(oracle::two_bus(), {"f", {1}}, ModelKind::branch_flow);
  CHECK(rep.empty);
  CHECK_FALSE(rep.best);
  CHECK(rep.rows.empty());
  CHECK_THROWS_AS(rep.best_row(), std::logic_error);
}

TEST_CASE("enumeration rows are ranked and thread-count independent") {
  const FaultScenario sc = load_scenario_file(oracle::data_path("data/scenarios/fault_c.json"));
  const EnumerationReport one = solve_enumeration(ieee33(), sc, ModelKind::bus_injection, kDefaultVoll, {}, 1);
  const EnumerationReport many = solve_enumeration(ieee33(), sc, ModelKind::bus_injection, kDefaultVoll, {}, 4);
  CHECK(report_to_csv(one) == report_to_csv(many));
  CHECK(report_to_json(one) == report_to_json(many));
  REQUIRE(one.best == std::size_t{0});
  for (std::size_t i = 1; i < one.rows.size(); ++i)
    if (one.rows[i].status == SolveStatus::optimal) CHECK(one.rows[i - 1].objective <= one.rows[i].objective);
  for (const EnumerationRow& r : one.rows) {
    if (r.status != SolveStatus::optimal) continue;
    for (const BusFlow& b : r.flow.buses) {
      const Bus& source = ieee33().bus(b.id);
      CHECK(std::abs(b.p_served + b.p_curtailed - source.p_demand) <= 1e-6);
      CHECK(std::abs(b.q_served + b.q_curtailed - source.q_demand) <= 1e-6);
    }
  }
  const auto doc = nlohmann::json::parse(report_to_json(one, true));
  CHECK(doc.contains("wall_seconds"));
  CHECK_FALSE(nlohmann::json::parse(report_to_json(one)).contains("wall_seconds"));
}

TEST_CASE("enumeration is invariant to the line order of the feeder file") {
  std::vector<Line> lines = ieee33().lines();
  std::mt19937_64 rng(12);
  std::shuffle(lines.begin(), lines.end(), rng);
  const Network shuffled(ieee33().buses(), lines, ieee33().base_mva(), ieee33().base_kv());
  const FaultScenario sc = load_scenario_file(oracle::data_path("data/scenarios/fault_a.json"));
  CHECK(report_to_csv(solve_enumeration(shuffled, sc, ModelKind::branch_flow)) ==
        report_to_csv(solve_enumeration(ieee33(), sc, ModelKind::branch_flow)));
}

TEST_CASE("both models agree at the optimum of a fault scenario") {
  const FaultScenario sc = load_scenario_file(oracle::data_path("data/scenarios/fault_b.json"));
  const EnumerationReport bf = solve_enumeration(ieee33(), sc, ModelKind::branch_flow);
  const EnumerationReport bi = solve_enumeration(ieee33(), sc, ModelKind::bus_injection);
  CHECK(bf.best_row().assignment == bi.best_row().assignment);
  CHECK(std::abs(bf.best_row().objective - bi.best_row().objective) <= 1e-4 * std::abs(bf.best_row().objective));
}
