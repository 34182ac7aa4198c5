#include "reconf/qubo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

namespace reconf {

namespace {

double tie_tolerance(const Qubo& q) {
  return 1e-12 * (1.0 + std::abs(q.offset) + q.linear.cwiseAbs().sum() + q.quad.cwiseAbs().sum());
}

void check_size(const Qubo& q, int cap) {
  if (q.size() < 1 || q.size() > cap)
    throw std::invalid_argument("qubo with " + std::to_string(q.size()) + " variables exceeds the limit of " +
                                std::to_string(cap));
}

// Visits every bitstring in Gray-code order with incremental energies.
template <typename Visit>
void gray_walk(const Qubo& q, Visit&& visit) {
  const int n = q.size();
  Eigen::VectorXd coupling = Eigen::VectorXd::Zero(n);  // sum_{j != i} Q_ij x_j
  Bits x = Bits::Zero(n);
  std::uint64_t index = 0;
  double e = q.offset;
  visit(index, e);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    const double sign = x(i) ? -1.0 : 1.0;
    e += sign * (q.linear(i) + q.quad(i, i) + 2.0 * coupling(i));
    x(i) ^= 1;
    index ^= std::uint64_t{1} << i;
    for (int j = 0; j < n; ++j)
      if (j != i) coupling(j) += sign * q.quad(j, i);
    visit(index, e);
  }
}

QuboSolution extreme(const Qubo& q, bool maximize) {
  check_size(q, kMaxExhaustiveVars);
  const double tol = tie_tolerance(q);
  std::uint64_t best_index = 0;
  double best = 0.0;
  bool first = true;
  gray_walk(q, [&](std::uint64_t index, double e) {
    const double v = maximize ? -e : e;
    if (first || v < best - tol) {
      best = v;
      best_index = index;
      first = false;
    } else if (v <= best + tol && index < best_index) {
      best = std::min(best, v);
      best_index = index;
    }
  });
  QuboSolution sol;
  sol.method = QuboMethod::exhaustive;
  sol.bits = bits_of_index(best_index, q.size());
  sol.energy = energy(q, sol.bits);
  sol.samples = std::uint64_t{1} << q.size();
  sol.best_trace = {sol.energy};
  return sol;
}

}  // namespace

Bits bits_of_index(std::uint64_t index, int n) {
  Bits b(n);
  for (int i = 0; i < n; ++i) b(i) = static_cast<std::uint8_t>((index >> i) & 1U);
  return b;
}

std::uint64_t index_of_bits(const Bits& bits) {
  std::uint64_t index = 0;
  for (Eigen::Index i = 0; i < bits.size(); ++i)
    if (bits(i)) index |= std::uint64_t{1} << i;
  return index;
}

std::string to_string(const Bits& bits) {
  std::string s;
  for (Eigen::Index i = 0; i < bits.size(); ++i) s += bits(i) ? '1' : '0';
  return s;
}

std::string to_string(QuboMethod method) {
  switch (method) {
    case QuboMethod::exhaustive: return "exhaustive";
    case QuboMethod::sa: return "sa";
    case QuboMethod::qaoa: return "qaoa";
  }
  return "unknown";
}

QuboMethod parse_qubo_method(const std::string& text) {
  if (text == "exhaustive") return QuboMethod::exhaustive;
  if (text == "sa") return QuboMethod::sa;
  if (text == "qaoa") return QuboMethod::qaoa;
  throw std::invalid_argument("unknown qubo backend '" + text + "' (expected exhaustive, sa or qaoa)");
}

QuboSolution solve_exhaustive(const Qubo& q) { return extreme(q, false); }

QuboSolution solve_exhaustive_max(const Qubo& q) { return extreme(q, true); }

Eigen::VectorXd build_cost_hamiltonian(const Qubo& q) {
  check_size(q, kMaxStatevectorQubits);
  Eigen::VectorXd diag(Eigen::Index{1} << q.size());
  gray_walk(q, [&](std::uint64_t index, double e) { diag(static_cast<Eigen::Index>(index)) = e; });
  return diag;
}

double approximation_ratio(const Qubo& q, const Bits& bits) {
  const double e = energy(q, bits);
  const double best = solve_exhaustive(q).energy;
  const double worst = solve_exhaustive_max(q).energy;
  const double tol = tie_tolerance(q);
  if (worst - best <= tol) return 1.0;
  if (std::abs(e - best) <= tol) return 1.0;
  if (std::abs(e - worst) <= tol) return 0.0;
  return std::clamp((worst - e) / (worst - best), 0.0, 1.0);
}

std::string qubo_to_json(const Qubo& q) {
  nlohmann::ordered_json j;
  j["n"] = q.size();
  std::vector<double> quad;
  for (int r = 0; r < q.size(); ++r)
    for (int c = 0; c < q.size(); ++c) quad.push_back(q.quad(r, c));
  j["quad"] = quad;
  j["linear"] = std::vector<double>(q.linear.data(), q.linear.data() + q.size());
  j["offset"] = q.offset;
  return j.dump(2);
}

Qubo qubo_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const int n = j.at("n").get<int>();
  const auto quad = j.at("quad").get<std::vector<double>>();
  const auto linear = j.at("linear").get<std::vector<double>>();
  if (n < 1 || quad.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n) ||
      linear.size() != static_cast<std::size_t>(n))
    throw std::invalid_argument("qubo document: sizes do not match n");
  Qubo::Matrix Q(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) Q(r, c) = quad[static_cast<std::size_t>(r * n + c)];
  return make_qubo<double>(Q, Eigen::Map<const Eigen::VectorXd>(linear.data(), n), j.value("offset", 0.0));
}

}  // namespace reconf
