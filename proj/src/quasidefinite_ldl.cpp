#include "quasidefinite_ldl.hpp"

#include <stdexcept>

#include <Eigen/OrderingMethods>

namespace reconf::detail {

void QuasidefiniteLdl::analyze(const SparseMatrix& lower, std::vector<int> signs) {
  n_ = static_cast<int>(lower.rows());
  if (lower.cols() != n_ || static_cast<int>(signs.size()) != n_)
    throw std::invalid_argument("ldl: shape mismatch");
  SparseMatrix full;
  full = lower.selfadjointView<Eigen::Lower>();
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  Eigen::AMDOrdering<int> amd;
  amd(full, pinv);
  perm_ = pinv.inverse();

  sign_.assign(n_, 1);
  for (int i = 0; i < n_; ++i) sign_[perm_.indices()(i)] = signs[i];

  upper_.resize(n_, n_);
  upper_.selfadjointView<Eigen::Upper>() = lower.selfadjointView<Eigen::Lower>().twistedBy(perm_);
  upper_.makeCompressed();

  // Elimination tree and column counts.
  parent_.assign(n_, -1);
  lnz_.assign(n_, 0);
  std::vector<int> flag(n_, -1);
  const int* ap = upper_.outerIndexPtr();
  const int* ai = upper_.innerIndexPtr();
  for (int k = 0; k < n_; ++k) {
    flag[k] = k;
    for (int p = ap[k]; p < ap[k + 1]; ++p) {
      int i = ai[p];
      if (i >= k) continue;
      for (; flag[i] != k; i = parent_[i]) {
        if (parent_[i] == -1) parent_[i] = k;
        ++lnz_[i];
        flag[i] = k;
      }
    }
  }
  lp_.assign(n_ + 1, 0);
  for (int k = 0; k < n_; ++k) lp_[k + 1] = lp_[k] + lnz_[k];
  li_.assign(lp_.back(), 0);
  lx_.assign(lp_.back(), 0.0);
  d_.assign(n_, 0.0);
}

void QuasidefiniteLdl::factorize(const SparseMatrix& lower, double threshold, double delta) {
  upper_.selfadjointView<Eigen::Upper>() = lower.selfadjointView<Eigen::Lower>().twistedBy(perm_);
  upper_.makeCompressed();
  const int* ap = upper_.outerIndexPtr();
  const int* ai = upper_.innerIndexPtr();
  const double* ax = upper_.valuePtr();
  std::vector<double> y(n_, 0.0);
  std::vector<int> pattern(n_), flag(n_, -1);
  std::fill(lnz_.begin(), lnz_.end(), 0);
  regularized_ = 0;
  for (int k = 0; k < n_; ++k) {
    int top = n_;
    flag[k] = k;
    y[k] = 0.0;
    for (int p = ap[k]; p < ap[k + 1]; ++p) {
      int i = ai[p];
      if (i > k) continue;
      y[i] += ax[p];
      int len = 0;
      for (; flag[i] != k; i = parent_[i]) {
        pattern[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    double dk = y[k];
    y[k] = 0.0;
    for (; top < n_; ++top) {
      const int i = pattern[top];
      const double yi = y[i];
      y[i] = 0.0;
      const int p2 = lp_[i] + lnz_[i];
      for (int p = lp_[i]; p < p2; ++p)
        y[li_[p]] -= lx_[p] * yi;
      const double lki = yi / d_[i];
      dk -= lki * yi;
      li_[p2] = k;
      lx_[p2] = lki;
      ++lnz_[i];
    }
    const int s = sign_[k];
    if (s * dk <= threshold) {
      dk = s * delta;
      ++regularized_;
    }
    d_[k] = dk;
  }
}

Vector QuasidefiniteLdl::solve(const Vector& rhs) const {
  Vector x = perm_ * rhs;
  for (int j = 0; j < n_; ++j)
    for (int p = lp_[j]; p < lp_[j + 1]; ++p)
      x(li_[p]) -= lx_[p] * x(j);
  for (int j = 0; j < n_; ++j) x(j) /= d_[j];
  for (int j = n_ - 1; j >= 0; --j)
    for (int p = lp_[j]; p < lp_[j + 1]; ++p)
      x(j) -= lx_[p] * x(li_[p]);
  return perm_.transpose() * x;
}

}  // namespace reconf::detail
