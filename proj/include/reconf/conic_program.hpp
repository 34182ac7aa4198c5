#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace reconf {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double, Index>;

struct BoxBound {
  Index index = 0;
  double lower = 0.0;
  double upper = 0.0;
};

/// head >= ||tail||
struct SocCone {
  Index head = 0;
  std::vector<Index> tail;
};

/// 2 p q >= ||tail||^2, p >= 0, q >= 0
struct RotatedCone {
  Index p = 0;
  Index q = 0;
  std::vector<Index> tail;
};

/// minimize c'x subject to A x = b, x_i >= 0 (nonneg), lower <= x_i <= upper (boxes),
/// and membership of index tuples in second-order / rotated cones.
struct ConicProgram {
  Index n_vars = 0;
  Vector objective;
  SparseMatrix eq_matrix;
  Vector eq_rhs;
  std::vector<Index> nonneg;
  std::vector<BoxBound> boxes;
  std::vector<SocCone> soc_cones;
  std::vector<RotatedCone> rotated_cones;

  /// Throws std::invalid_argument on out-of-range indices, shape mismatch or
  /// a variable heading two cones.
  void validate() const;

  double objective_value(const Vector& x) const { return objective.dot(x); }
};

/// Incremental construction of a ConicProgram.
class ProgramBuilder {
 public:
  Index add_variable(double cost = 0.0);
  Index add_nonneg(double cost = 0.0);
  Index add_boxed(double lower, double upper, double cost = 0.0);

  void set_cost(Index var, double cost);
  void add_box(Index var, double lower, double upper) { boxes_.push_back({var, lower, upper}); }
  void add_nonneg_bound(Index var) { nonneg_.push_back(var); }

  /// sum coef * x = rhs; returns the row index.
  Index add_equality(std::initializer_list<std::pair<Index, double>> terms, double rhs);
  Index add_equality(std::span<const std::pair<Index, double>> terms, double rhs);

  void add_soc(Index head, std::vector<Index> tail) { soc_.push_back({head, std::move(tail)}); }
  void add_rotated(Index p, Index q, std::vector<Index> tail) { rotated_.push_back({p, q, std::move(tail)}); }

  Index n_vars() const { return static_cast<Index>(cost_.size()); }
  ConicProgram build() const;

 private:
  std::vector<double> cost_;
  std::vector<Triplet> eq_;
  std::vector<double> rhs_;
  std::vector<Index> nonneg_;
  std::vector<BoxBound> boxes_;
  std::vector<SocCone> soc_;
  std::vector<RotatedCone> rotated_;
};

/// Rows of an affine map z = M x with z in the standard second-order cone.
struct SocRows {
  Index size = 0;
  std::vector<Triplet> coefficients;  // (row within block, variable, value)
};

/// 2pq >= ||u||^2, p, q >= 0  <=>  (p + q) >= ||(p - q, sqrt(2) u)||
SocRows rotated_to_soc(Index p, Index q, std::span<const Index> tail);
SocRows soc_rows(Index head, std::span<const Index> tail);

/// Structured text dump (JSON) for debugging and golden tests.
std::string dump_program(const ConicProgram& program);

/// Largest constraint violation of x, split by constraint family.
struct Violation {
  double equality = 0.0;
  double bounds = 0.0;
  double cones = 0.0;
  double max() const { return std::max({equality, bounds, cones}); }
};
Violation constraint_violation(const ConicProgram& program, const Vector& x);

}  // namespace reconf
