#include "reconf/conic_program.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace reconf {

void ConicProgram::validate() const {
  auto check = [this](Index i, const char* what) {
    if (i < 0 || i >= n_vars) throw std::invalid_argument(std::string(what) + " index out of range");
  };
  if (objective.size() != n_vars) throw std::invalid_argument("objective length differs from n_vars");
  if (eq_matrix.cols() != n_vars) throw std::invalid_argument("equality matrix column count differs from n_vars");
  if (eq_matrix.rows() != eq_rhs.size()) throw std::invalid_argument("equality rhs length differs from row count");
  for (Index i : nonneg) check(i, "nonneg");
  for (const BoxBound& b : boxes) {
    check(b.index, "box");
    if (b.lower > b.upper) throw std::invalid_argument("box with lower > upper");
  }
  std::set<Index> heads;
  for (const SocCone& c : soc_cones) {
    check(c.head, "cone head");
    for (Index i : c.tail) check(i, "cone tail");
    if (!heads.insert(c.head).second) throw std::invalid_argument("variable heads two cones");
  }
  for (const RotatedCone& c : rotated_cones) {
    check(c.p, "rotated cone p");
    check(c.q, "rotated cone q");
    for (Index i : c.tail) check(i, "rotated cone tail");
    if (!heads.insert(c.p).second || !heads.insert(c.q).second)
      throw std::invalid_argument("variable heads two cones");
  }
}

Index ProgramBuilder::add_variable(double cost) {
  cost_.push_back(cost);
  return static_cast<Index>(cost_.size()) - 1;
}

Index ProgramBuilder::add_nonneg(double cost) {
  const Index v = add_variable(cost);
  nonneg_.push_back(v);
  return v;
}

Index ProgramBuilder::add_boxed(double lower, double upper, double cost) {
  const Index v = add_variable(cost);
  boxes_.push_back({v, lower, upper});
  return v;
}

void ProgramBuilder::set_cost(Index var, double cost) { cost_.at(static_cast<std::size_t>(var)) = cost; }

Index ProgramBuilder::add_equality(std::initializer_list<std::pair<Index, double>> terms, double rhs) {
  return add_equality(std::span<const std::pair<Index, double>>(terms.begin(), terms.size()), rhs);
}

Index ProgramBuilder::add_equality(std::span<const std::pair<Index, double>> terms, double rhs) {
  const Index row = static_cast<Index>(rhs_.size());
  for (const auto& [var, coef] : terms)
    if (coef != 0.0) eq_.emplace_back(row, var, coef);
  rhs_.push_back(rhs);
  return row;
}

ConicProgram ProgramBuilder::build() const {
  ConicProgram p;
  p.n_vars = n_vars();
  p.objective = Eigen::Map<const Vector>(cost_.data(), p.n_vars);
  p.eq_matrix.resize(static_cast<Index>(rhs_.size()), p.n_vars);
  p.eq_matrix.setFromTriplets(eq_.begin(), eq_.end());
  p.eq_rhs = Eigen::Map<const Vector>(rhs_.data(), static_cast<Index>(rhs_.size()));
  p.nonneg = nonneg_;
  p.boxes = boxes_;
  p.soc_cones = soc_;
  p.rotated_cones = rotated_;
  p.validate();
  return p;
}

SocRows rotated_to_soc(Index p, Index q, std::span<const Index> tail) {
  SocRows rows;
  rows.size = static_cast<Index>(tail.size()) + 2;
  rows.coefficients = {{0, p, 1.0}, {0, q, 1.0}, {1, p, 1.0}, {1, q, -1.0}};
  for (std::size_t k = 0; k < tail.size(); ++k)
    rows.coefficients.emplace_back(static_cast<Index>(k) + 2, tail[k], std::sqrt(2.0));
  return rows;
}

SocRows soc_rows(Index head, std::span<const Index> tail) {
  SocRows rows;
  rows.size = static_cast<Index>(tail.size()) + 1;
  rows.coefficients = {{0, head, 1.0}};
  for (std::size_t k = 0; k < tail.size(); ++k) rows.coefficients.emplace_back(static_cast<Index>(k) + 1, tail[k], 1.0);
  return rows;
}

std::string dump_program(const ConicProgram& program) {
  using json = nlohmann::json;
  json doc;
  doc["n_vars"] = program.n_vars;
  doc["objective"] = std::vector<double>(program.objective.data(), program.objective.data() + program.objective.size());
  json triplets = json::array();
  for (Index k = 0; k < program.eq_matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(program.eq_matrix, k); it; ++it)
      triplets.push_back({it.row(), it.col(), it.value()});
  std::sort(triplets.begin(), triplets.end());
  doc["equalities"] = {{"rows", program.eq_matrix.rows()},
                       {"triplets", triplets},
                       {"rhs", std::vector<double>(program.eq_rhs.data(), program.eq_rhs.data() + program.eq_rhs.size())}};
  doc["nonneg"] = program.nonneg;
  json boxes = json::array();
  for (const BoxBound& b : program.boxes) boxes.push_back({b.index, b.lower, b.upper});
  doc["boxes"] = boxes;
  json soc = json::array();
  for (const SocCone& c : program.soc_cones) soc.push_back({{"head", c.head}, {"tail", c.tail}});
  doc["soc_cones"] = soc;
  json rot = json::array();
  for (const RotatedCone& c : program.rotated_cones) rot.push_back({{"p", c.p}, {"q", c.q}, {"tail", c.tail}});
  doc["rotated_cones"] = rot;
  return doc.dump(1) + "\n";
}

Violation constraint_violation(const ConicProgram& program, const Vector& x) {
  Violation v;
  if (program.eq_matrix.rows() > 0) v.equality = (program.eq_matrix * x - program.eq_rhs).lpNorm<Eigen::Infinity>();
  for (Index i : program.nonneg) v.bounds = std::max(v.bounds, -x(i));
  for (const BoxBound& b : program.boxes)
    v.bounds = std::max({v.bounds, b.lower - x(b.index), x(b.index) - b.upper});
  for (const SocCone& c : program.soc_cones) {
    double s = 0.0;
    for (Index i : c.tail) s += x(i) * x(i);
    v.cones = std::max(v.cones, std::sqrt(s) - x(c.head));
  }
  for (const RotatedCone& c : program.rotated_cones) {
    double s = 0.0;
    for (Index i : c.tail) s += x(i) * x(i);
    const double pp = x(c.p), qq = x(c.q);
    v.cones = std::max({v.cones, -pp, -qq, std::sqrt((pp - qq) * (pp - qq) + 2.0 * s) - (pp + qq)});
  }
  return v;
}

}  // namespace reconf
