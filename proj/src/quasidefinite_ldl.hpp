#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "reconf/conic_program.hpp"

namespace reconf::detail {

/// Sparse LDL' factorization of a quasi-definite matrix whose diagonal sign
/// pattern is known in advance. Pivots with the wrong sign or a magnitude
/// below `threshold` are replaced by sign * `delta`, so the factorization
/// never breaks down; callers recover accuracy by iterative refinement.
class QuasidefiniteLdl {
 public:
  /// `lower` holds the lower triangle (diagonal included); the pattern must be
  /// identical on every later call to factorize().
  void analyze(const SparseMatrix& lower, std::vector<int> signs);

  void factorize(const SparseMatrix& lower, double threshold, double delta);

  Vector solve(const Vector& rhs) const;

  /// Number of pivots that had to be replaced in the last factorization.
  int regularized_pivots() const { return regularized_; }

 private:
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm_;
  SparseMatrix upper_;  // permuted matrix, upper triangle
  std::vector<int> sign_;
  std::vector<int> parent_, lnz_, lp_;
  std::vector<int> li_;
  std::vector<double> lx_, d_;
  int n_ = 0;
  int regularized_ = 0;
};

}  // namespace reconf::detail
