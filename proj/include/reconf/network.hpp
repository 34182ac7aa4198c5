#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reconf {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All electrical quantities are per-unit on the network base.
struct Bus {
  int id = 0;
  double p_demand = 0.0;
  double q_demand = 0.0;
  double v_min = 0.9;
  double v_max = 1.05;
  bool is_substation = false;

  bool operator==(const Bus&) const = default;
};

struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double r = 0.0;
  double x = 0.0;
  bool switchable = false;
  bool normally_open = false;

  double impedance_sq() const { return r * r + x * x; }

  bool operator==(const Line&) const = default;
};

/// Feeder graph. Buses and lines are kept sorted by id so downstream
/// results do not depend on the order of the source document.
class Network {
 public:
  Network() = default;
  Network(std::vector<Bus> buses, std::vector<Line> lines, double base_mva, double base_kv);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }
  double base_mva() const { return base_mva_; }
  double base_kv() const { return base_kv_; }

  std::size_t bus_index(int bus_id) const;
  std::size_t line_index(int line_id) const;
  bool has_bus(int bus_id) const { return bus_pos_.count(bus_id) != 0; }
  bool has_line(int line_id) const { return line_pos_.count(line_id) != 0; }
  const Bus& bus(int bus_id) const { return buses_[bus_index(bus_id)]; }
  const Line& line(int line_id) const { return lines_[line_index(line_id)]; }
  const Bus& substation() const { return buses_[substation_]; }

  /// Ids of switchable lines, ascending.
  std::vector<int> switch_ids() const;
  /// Indices of lines incident to a bus (by bus position).
  const std::vector<std::size_t>& incident_lines(std::size_t bus_pos) const { return incident_[bus_pos]; }

  bool operator==(const Network& other) const {
    return buses_ == other.buses_ && lines_ == other.lines_ && base_mva_ == other.base_mva_ &&
           base_kv_ == other.base_kv_;
  }

 private:
  void validate();

  std::vector<Bus> buses_;
  std::vector<Line> lines_;
  double base_mva_ = 1.0;
  double base_kv_ = 1.0;
  std::size_t substation_ = 0;
  std::map<int, std::size_t> bus_pos_;
  std::map<int, std::size_t> line_pos_;
  std::vector<std::vector<std::size_t>> incident_;
};

struct FaultScenario {
  std::string name;
  std::set<int> faulted_lines;
};

/// Switchable line id -> closed.
using SwitchAssignment = std::map<int, bool>;

/// Line id -> closed.
using LineStatus = std::map<int, bool>;

Network load_network(std::string_view text);
Network load_network_file(const std::string& path);
/// Writes per-unit fields so a reload reproduces the network exactly.
std::string save_network(const Network& network);

FaultScenario load_scenario(std::string_view text);
FaultScenario load_scenario_file(const std::string& path);
std::string save_scenario(const FaultScenario& scenario);

void validate_scenario(const Network& network, const FaultScenario& scenario);
void validate_assignment(const Network& network, const SwitchAssignment& assignment);

/// All tie switches at their normal position (open).
SwitchAssignment normal_assignment(const Network& network);

LineStatus effective_status(const Network& network, const FaultScenario& scenario,
                            const SwitchAssignment& assignment);

bool is_spanning_tree(const Network& network, const std::set<int>& closed);
bool is_spanning_tree(const Network& network, const LineStatus& status);

/// Radial assignments in lexicographic order over (alpha of smallest switch id, ...).
std::vector<SwitchAssignment> enumerate_radial_configs(const Network& network,
                                                       const FaultScenario& scenario);

int hamming_distance(const SwitchAssignment& a, const SwitchAssignment& b);
std::string to_string(const SwitchAssignment& assignment);

}  // namespace reconf
