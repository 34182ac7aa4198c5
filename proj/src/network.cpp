#include "reconf/network.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace reconf {

using json = nlohmann::json;

namespace {

struct DisjointSet {
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

  std::size_t find(std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }

  std::vector<std::size_t> parent;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, where);
}

// Either "<name>_pu" directly, or "<physical>" scaled by factor.
double pu_field(const json& obj, const char* pu_key, const char* phys_key, double factor,
                const std::string& where) {
  if (obj.contains(pu_key)) return field<double>(obj, pu_key, where);
  return field<double>(obj, phys_key, where) * factor;
}

}  // namespace

Network::Network(std::vector<Bus> buses, std::vector<Line> lines, double base_mva, double base_kv)
    : buses_(std::move(buses)), lines_(std::move(lines)), base_mva_(base_mva), base_kv_(base_kv) {
  std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  std::sort(lines_.begin(), lines_.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < buses_.size(); ++k) {
    if (!bus_pos_.emplace(buses_[k].id, k).second)
      throw ValidationError("duplicate bus id " + std::to_string(buses_[k].id));
  }
  for (std::size_t k = 0; k < lines_.size(); ++k) {
    if (!line_pos_.emplace(lines_[k].id, k).second)
      throw ValidationError("duplicate line id " + std::to_string(lines_[k].id));
  }
  validate();
  incident_.assign(buses_.size(), {});
  for (std::size_t k = 0; k < lines_.size(); ++k) {
    incident_[bus_pos_.at(lines_[k].from_bus)].push_back(k);
    incident_[bus_pos_.at(lines_[k].to_bus)].push_back(k);
  }
}

void Network::validate() {
  if (!(base_mva_ > 0.0) || !(base_kv_ > 0.0)) throw ValidationError("base_mva and base_kv must be positive");
  if (buses_.empty()) throw ValidationError("network has no buses");
  int substations = 0;
  for (std::size_t k = 0; k < buses_.size(); ++k) {
    const Bus& b = buses_[k];
    const std::string name = "bus " + std::to_string(b.id);
    if (!(b.v_min > 0.0) || !(b.v_min <= b.v_max)) throw ValidationError(name + ": need 0 < v_min <= v_max");
    if (b.p_demand < 0.0 || b.q_demand < 0.0) throw ValidationError(name + ": negative demand");
    if (b.is_substation) {
      ++substations;
      substation_ = k;
      if (b.p_demand != 0.0 || b.q_demand != 0.0) throw ValidationError(name + ": substation demand must be zero");
    }
  }
  if (substations != 1) throw ValidationError("network must have exactly one substation, found " + std::to_string(substations));
  for (const Line& l : lines_) {
    const std::string name = "line " + std::to_string(l.id);
    if (!has_bus(l.from_bus)) throw ValidationError(name + ": unknown from bus " + std::to_string(l.from_bus));
    if (!has_bus(l.to_bus)) throw ValidationError(name + ": unknown to bus " + std::to_string(l.to_bus));
    if (l.from_bus == l.to_bus) throw ValidationError(name + ": from and to bus coincide");
    if (l.r < 0.0 || l.x < 0.0 || !(l.r + l.x > 0.0)) throw ValidationError(name + ": need r, x >= 0 and r + x > 0");
    if (l.normally_open && !l.switchable) throw ValidationError(name + ": normally_open requires switchable");
  }
  DisjointSet ds(buses_.size());
  std::size_t components = buses_.size();
  for (const Line& l : lines_) {
    if (ds.unite(bus_pos_.at(l.from_bus), bus_pos_.at(l.to_bus))) --components;
  }
  if (components != 1) throw ValidationError("network is not connected with all lines closed");
}

std::size_t Network::bus_index(int bus_id) const {
  auto it = bus_pos_.find(bus_id);
  if (it == bus_pos_.end()) throw std::out_of_range("unknown bus " + std::to_string(bus_id));
  return it->second;
}

std::size_t Network::line_index(int line_id) const {
  auto it = line_pos_.find(line_id);
  if (it == line_pos_.end()) throw std::out_of_range("unknown line " + std::to_string(line_id));
  return it->second;
}

std::vector<int> Network::switch_ids() const {
  std::vector<int> ids;
  for (const Line& l : lines_)
    if (l.switchable) ids.push_back(l.id);
  return ids;
}

Network load_network(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("feeder document must be an object");
  const double base_mva = field<double>(doc, "base_mva", "document");
  const double base_kv = field<double>(doc, "base_kv", "document");
  if (!(base_mva > 0.0) || !(base_kv > 0.0)) throw ValidationError("base_mva and base_kv must be positive");
  const double power_scale = 1.0 / (1000.0 * base_mva);
  const double ohm_scale = base_mva / (base_kv * base_kv);

  const json& jb = doc.contains("buses") ? doc.at("buses") : json();
  const json& jl = doc.contains("lines") ? doc.at("lines") : json();
  if (!jb.is_array() || !jl.is_array()) throw ParseError("document needs 'buses' and 'lines' arrays");

  std::vector<Bus> buses;
  for (std::size_t k = 0; k < jb.size(); ++k) {
    const json& o = jb[k];
    const std::string where = "buses[" + std::to_string(k) + "]";
    if (!o.is_object()) throw ParseError(where + ": expected object");
    Bus b;
    b.id = field<int>(o, "id", where);
    b.p_demand = pu_field(o, "pd_pu", "pd_kw", power_scale, where);
    b.q_demand = pu_field(o, "qd_pu", "qd_kvar", power_scale, where);
    b.v_min = field<double>(o, "vmin_pu", where);
    b.v_max = field<double>(o, "vmax_pu", where);
    b.is_substation = field_or<bool>(o, "substation", false, where);
    buses.push_back(b);
  }
  std::vector<Line> lines;
  for (std::size_t k = 0; k < jl.size(); ++k) {
    const json& o = jl[k];
    const std::string where = "lines[" + std::to_string(k) + "]";
    if (!o.is_object()) throw ParseError(where + ": expected object");
    Line l;
    l.id = field<int>(o, "id", where);
    l.from_bus = field<int>(o, "from", where);
    l.to_bus = field<int>(o, "to", where);
    l.r = pu_field(o, "r_pu", "r_ohm", ohm_scale, where);
    l.x = pu_field(o, "x_pu", "x_ohm", ohm_scale, where);
    l.switchable = field_or<bool>(o, "switchable", false, where);
    l.normally_open = field_or<bool>(o, "normally_open", false, where);
    lines.push_back(l);
  }
  return Network(std::move(buses), std::move(lines), base_mva, base_kv);
}

Network load_network_file(const std::string& path) { return load_network(read_file(path)); }

std::string save_network(const Network& network) {
  json doc;
  doc["base_mva"] = network.base_mva();
  doc["base_kv"] = network.base_kv();
  doc["buses"] = json::array();
  for (const Bus& b : network.buses()) {
    doc["buses"].push_back({{"id", b.id},
                            {"pd_pu", b.p_demand},
                            {"qd_pu", b.q_demand},
                            {"vmin_pu", b.v_min},
                            {"vmax_pu", b.v_max},
                            {"substation", b.is_substation}});
  }
  doc["lines"] = json::array();
  for (const Line& l : network.lines()) {
    doc["lines"].push_back({{"id", l.id},
                            {"from", l.from_bus},
                            {"to", l.to_bus},
                            {"r_pu", l.r},
                            {"x_pu", l.x},
                            {"switchable", l.switchable},
                            {"normally_open", l.normally_open}});
  }
  return doc.dump(2) + "\n";
}

FaultScenario load_scenario(std::string_view text) {
  const json doc = parse_document(text);
  if (!doc.is_object()) throw ParseError("scenario document must be an object");
  FaultScenario s;
  s.name = field<std::string>(doc, "name", "scenario");
  for (int id : field<std::vector<int>>(doc, "faulted_lines", "scenario")) s.faulted_lines.insert(id);
  return s;
}

FaultScenario load_scenario_file(const std::string& path) { return load_scenario(read_file(path)); }

std::string save_scenario(const FaultScenario& scenario) {
  json doc;
  doc["name"] = scenario.name;
  doc["faulted_lines"] = std::vector<int>(scenario.faulted_lines.begin(), scenario.faulted_lines.end());
  return doc.dump(2) + "\n";
}

void validate_scenario(const Network& network, const FaultScenario& scenario) {
  for (int id : scenario.faulted_lines) {
    if (!network.has_line(id))
      throw ValidationError("scenario '" + scenario.name + "': faulted line " + std::to_string(id) + " does not exist");
    if (network.line(id).switchable)
      throw ValidationError("scenario '" + scenario.name + "': faulted line " + std::to_string(id) +
                            " is switchable; only non-switchable lines can fault");
  }
}

void validate_assignment(const Network& network, const SwitchAssignment& assignment) {
  const std::vector<int> ids = network.switch_ids();
  for (int id : ids) {
    if (!assignment.count(id)) throw ValidationError("assignment is missing switch " + std::to_string(id));
  }
  for (const auto& [id, closed] : assignment) {
    if (!network.has_line(id) || !network.line(id).switchable)
      throw ValidationError("assignment names non-switchable line " + std::to_string(id));
  }
}

SwitchAssignment normal_assignment(const Network& network) {
  SwitchAssignment a;
  for (const Line& l : network.lines())
    if (l.switchable) a[l.id] = !l.normally_open;
  return a;
}

LineStatus effective_status(const Network& network, const FaultScenario& scenario,
                            const SwitchAssignment& assignment) {
  validate_scenario(network, scenario);
  validate_assignment(network, assignment);
  LineStatus status;
  for (const Line& l : network.lines()) {
    status[l.id] = l.switchable ? assignment.at(l.id) : !scenario.faulted_lines.count(l.id);
  }
  return status;
}

bool is_spanning_tree(const Network& network, const std::set<int>& closed) {
  const std::size_t n = network.buses().size();
  if (closed.size() + 1 != n) return false;
  DisjointSet ds(n);
  for (int id : closed) {
    if (!network.has_line(id)) return false;
    const Line& l = network.line(id);
    if (!ds.unite(network.bus_index(l.from_bus), network.bus_index(l.to_bus))) return false;
  }
  return true;
}

bool is_spanning_tree(const Network& network, const LineStatus& status) {
  std::set<int> closed;
  for (const auto& [id, on] : status)
    if (on) closed.insert(id);
  return is_spanning_tree(network, closed);
}

std::vector<SwitchAssignment> enumerate_radial_configs(const Network& network, const FaultScenario& scenario) {
  validate_scenario(network, scenario);
  const std::vector<int> ids = network.switch_ids();
  const std::size_t m = ids.size();
  if (m > 24) throw std::invalid_argument("too many switches to enumerate: " + std::to_string(m));

  std::set<int> base;
  for (const Line& l : network.lines())
    if (!l.switchable && !scenario.faulted_lines.count(l.id)) base.insert(l.id);

  std::vector<SwitchAssignment> out;
  const std::uint64_t count = std::uint64_t{1} << m;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    // First switch is the most significant position so masks ascend lexicographically.
    std::set<int> closed = base;
    SwitchAssignment a;
    for (std::size_t k = 0; k < m; ++k) {
      const bool on = (mask >> (m - 1 - k)) & 1u;
      a[ids[k]] = on;
      if (on) closed.insert(ids[k]);
    }
    if (is_spanning_tree(network, closed)) out.push_back(std::move(a));
  }
  return out;
}

int hamming_distance(const SwitchAssignment& a, const SwitchAssignment& b) {
  int d = 0;
  for (const auto& [id, on] : a) {
    auto it = b.find(id);
    if (it == b.end() || it->second != on) ++d;
  }
  for (const auto& [id, on] : b)
    if (!a.count(id)) ++d;
  return d;
}

std::string to_string(const SwitchAssignment& assignment) {
  std::string s;
  for (const auto& [id, on] : assignment) {
    if (!s.empty()) s += ' ';
    s += std::to_string(id) + ':' + (on ? '1' : '0');
  }
  return s;
}

}  // namespace reconf
