#include "reconf/socp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCholesky>

#include "reconf/cones.hpp"
#include "socp_internal.hpp"

namespace reconf {

using namespace detail;

namespace {

constexpr double kSigma = 1e-6;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqualityFactor = 1e3;
constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;
constexpr double kFeasTol = 1e-9;

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Presolve: exact elimination of variables the constraints pin to a value.

struct Presolve {
  bool infeasible = false;
  std::vector<char> fixed;
  Vector value;
  Vector lower;
  Vector upper;
  std::vector<char> row_active;
  std::vector<char> soc_active;
  std::vector<char> rot_active;
};

class Presolver {
 public:
  explicit Presolver(const ConicProgram& p) : p_(p), rows_(p.eq_matrix) {
    const Index n = p.n_vars;
    out_.fixed.assign(static_cast<std::size_t>(n), 0);
    out_.value = Vector::Zero(n);
    out_.lower = Vector::Constant(n, -kInf);
    out_.upper = Vector::Constant(n, kInf);
    out_.row_active.assign(static_cast<std::size_t>(rows_.rows()), 1);
    out_.soc_active.assign(p.soc_cones.size(), 1);
    out_.rot_active.assign(p.rotated_cones.size(), 1);
  }

  Presolve run() {
    for (Index i : p_.nonneg) out_.lower(i) = std::max(out_.lower(i), 0.0);
    for (const BoxBound& b : p_.boxes) {
      out_.lower(b.index) = std::max(out_.lower(b.index), b.lower);
      out_.upper(b.index) = std::min(out_.upper(b.index), b.upper);
    }
    for (Index j = 0; j < p_.n_vars; ++j) {
      if (out_.lower(j) > out_.upper(j) + kFeasTol) return infeasible();
      if (out_.lower(j) >= out_.upper(j)) fix(j, out_.lower(j));
    }
    bool changed = true;
    while (changed && !out_.infeasible) {
      changed = false;
      for (Index r = 0; r < rows_.rows() && !out_.infeasible; ++r)
        if (out_.row_active[r]) changed |= reduce_row(r);
      for (std::size_t k = 0; k < p_.rotated_cones.size() && !out_.infeasible; ++k)
        if (out_.rot_active[k]) changed |= reduce_rotated(k);
      for (std::size_t k = 0; k < p_.soc_cones.size() && !out_.infeasible; ++k)
        if (out_.soc_active[k]) changed |= reduce_soc(k);
    }
    return std::move(out_);
  }

 private:
  Presolve infeasible() {
    out_.infeasible = true;
    return std::move(out_);
  }

  bool is_fixed(Index j) const { return out_.fixed[static_cast<std::size_t>(j)] != 0; }

  void fix(Index j, double v) {
    if (is_fixed(j)) {
      if (std::abs(v - out_.value(j)) > kFeasTol * (1.0 + std::abs(v))) out_.infeasible = true;
      return;
    }
    if (v < out_.lower(j) - kFeasTol * (1.0 + std::abs(v)) || v > out_.upper(j) + kFeasTol * (1.0 + std::abs(v))) {
      out_.infeasible = true;
      return;
    }
    out_.fixed[static_cast<std::size_t>(j)] = 1;
    out_.value(j) = project_interval(v, out_.lower(j), out_.upper(j));
  }

  bool reduce_row(Index r) {
    double rhs = p_.eq_rhs(r);
    double scale = 1.0 + std::abs(rhs);
    std::vector<std::pair<Index, double>> free_terms;
    for (RowMatrix::InnerIterator it(rows_, r); it; ++it) {
      if (is_fixed(it.col())) {
        rhs -= it.value() * out_.value(it.col());
        scale += std::abs(it.value() * out_.value(it.col()));
      } else {
        free_terms.emplace_back(it.col(), it.value());
      }
    }
    if (free_terms.empty()) {
      if (std::abs(rhs) > kFeasTol * scale) out_.infeasible = true;
      out_.row_active[r] = 0;
      return true;
    }
    if (free_terms.size() == 1) {
      fix(free_terms[0].first, rhs / free_terms[0].second);
      out_.row_active[r] = 0;
      return true;
    }
    const bool all_positive =
        std::all_of(free_terms.begin(), free_terms.end(), [](const auto& t) { return t.second > 0; });
    const bool all_negative =
        std::all_of(free_terms.begin(), free_terms.end(), [](const auto& t) { return t.second < 0; });
    const bool all_nonneg =
        std::all_of(free_terms.begin(), free_terms.end(), [this](const auto& t) { return out_.lower(t.first) >= 0.0; });
    if ((all_positive || all_negative) && all_nonneg) {
      const double signed_rhs = all_positive ? rhs : -rhs;
      if (signed_rhs < -kFeasTol * scale) {
        out_.infeasible = true;
        return true;
      }
      if (std::abs(rhs) <= 1e-15 * scale) {
        for (const auto& t : free_terms) fix(t.first, 0.0);
        out_.row_active[r] = 0;
        return true;
      }
    }
    return false;
  }

  bool pinned_at_zero(Index j) const { return is_fixed(j) && out_.value(j) <= 0.0; }

  bool reduce_rotated(std::size_t k) {
    const RotatedCone& c = p_.rotated_cones[k];
    for (Index h : {c.p, c.q}) {
      if (is_fixed(h) && out_.value(h) < -kFeasTol) {
        out_.infeasible = true;
        return true;
      }
    }
    if (pinned_at_zero(c.p) || pinned_at_zero(c.q)) {
      for (Index t : c.tail) fix(t, 0.0);
      for (Index h : {c.p, c.q}) {
        out_.lower(h) = std::max(out_.lower(h), 0.0);
        if (is_fixed(h) && out_.value(h) < 0.0) out_.value(h) = 0.0;
      }
      out_.rot_active[k] = 0;
      return true;
    }
    if (is_fixed(c.p) && is_fixed(c.q) &&
        std::all_of(c.tail.begin(), c.tail.end(), [this](Index t) { return is_fixed(t); })) {
      double s = 0.0;
      for (Index t : c.tail) s += out_.value(t) * out_.value(t);
      if (s > 2.0 * out_.value(c.p) * out_.value(c.q) + kFeasTol) out_.infeasible = true;
      out_.rot_active[k] = 0;
      return true;
    }
    return false;
  }

  bool reduce_soc(std::size_t k) {
    const SocCone& c = p_.soc_cones[k];
    if (is_fixed(c.head) && out_.value(c.head) < -kFeasTol) {
      out_.infeasible = true;
      return true;
    }
    if (pinned_at_zero(c.head)) {
      for (Index t : c.tail) fix(t, 0.0);
      out_.soc_active[k] = 0;
      return true;
    }
    if (is_fixed(c.head) && std::all_of(c.tail.begin(), c.tail.end(), [this](Index t) { return is_fixed(t); })) {
      double s = 0.0;
      for (Index t : c.tail) s += out_.value(t) * out_.value(t);
      if (std::sqrt(s) > out_.value(c.head) + kFeasTol) out_.infeasible = true;
      out_.soc_active[k] = 0;
      return true;
    }
    return false;
  }

  const ConicProgram& p_;
  RowMatrix rows_;
  Presolve out_;
};

Reduced build_reduced(const ConicProgram& p, const Presolve& pre) {
  Reduced red;
  std::vector<Index> col(static_cast<std::size_t>(p.n_vars), -1);
  for (Index j = 0; j < p.n_vars; ++j) {
    if (pre.fixed[static_cast<std::size_t>(j)]) {
      red.objective_offset += p.objective(j) * pre.value(j);
    } else {
      col[static_cast<std::size_t>(j)] = static_cast<Index>(red.var_of.size());
      red.var_of.push_back(j);
    }
  }
  red.n = static_cast<Index>(red.var_of.size());
  red.c.resize(red.n);
  for (Index k = 0; k < red.n; ++k) red.c(k) = p.objective(red.var_of[static_cast<std::size_t>(k)]);

  std::vector<Triplet> trip;
  std::vector<double> lo, up;
  std::vector<char> in_cone;
  auto add_row = [&](double l, double u, bool cone, Index eq_row) {
    lo.push_back(l);
    up.push_back(u);
    in_cone.push_back(cone ? 1 : 0);
    red.eq_row_of.push_back(eq_row);
    return static_cast<Index>(lo.size()) - 1;
  };

  const RowMatrix rows(p.eq_matrix);
  for (Index r = 0; r < rows.rows(); ++r) {
    if (!pre.row_active[static_cast<std::size_t>(r)]) continue;
    double rhs = p.eq_rhs(r);
    std::vector<Triplet> row_trip;
    for (RowMatrix::InnerIterator it(rows, r); it; ++it) {
      const Index j = col[static_cast<std::size_t>(it.col())];
      if (j < 0) {
        rhs -= it.value() * pre.value(it.col());
      } else {
        row_trip.emplace_back(0, j, it.value());
      }
    }
    const Index row = add_row(rhs, rhs, false, r);
    for (const Triplet& t : row_trip) trip.emplace_back(row, t.col(), t.value());
  }
  for (Index k = 0; k < red.n; ++k) {
    const Index j = red.var_of[static_cast<std::size_t>(k)];
    if (std::isfinite(pre.lower(j)) || std::isfinite(pre.upper(j))) {
      const Index row = add_row(pre.lower(j), pre.upper(j), false, -1);
      trip.emplace_back(row, k, 1.0);
    }
  }
  auto add_cone = [&](const SocRows& rows_of_cone) {
    ConeBlock block;
    block.start = static_cast<Index>(lo.size());
    block.size = rows_of_cone.size;
    Vector constant = Vector::Zero(block.size);
    for (Index i = 0; i < block.size; ++i) add_row(-kInf, kInf, true, -1);
    for (const Triplet& t : rows_of_cone.coefficients) {
      const Index j = col[static_cast<std::size_t>(t.col())];
      if (j < 0) {
        constant(t.row()) += t.value() * pre.value(t.col());
      } else {
        trip.emplace_back(block.start + t.row(), j, t.value());
      }
    }
    block.shift = -constant;
    red.cones.push_back(std::move(block));
  };
  for (std::size_t k = 0; k < p.soc_cones.size(); ++k)
    if (pre.soc_active[k]) add_cone(soc_rows(p.soc_cones[k].head, p.soc_cones[k].tail));
  for (std::size_t k = 0; k < p.rotated_cones.size(); ++k) {
    if (!pre.rot_active[k]) continue;
    const RotatedCone& rc = p.rotated_cones[k];
    add_cone(rotated_to_soc(rc.p, rc.q, rc.tail));
  }

  red.m = static_cast<Index>(lo.size());
  red.A.resize(red.m, red.n);
  red.A.setFromTriplets(trip.begin(), trip.end());
  red.lower = Eigen::Map<Vector>(lo.data(), red.m);
  red.upper = Eigen::Map<Vector>(up.data(), red.m);
  red.in_cone = std::move(in_cone);
  return red;
}

// ---------------------------------------------------------------------------
// Ruiz equilibration. Row scaling is uniform inside each cone block so the
// scaled cone is the same cone.


double clamp_norm(double v) {
  if (v < kMinScaling) return 1.0;
  return std::min(v, kMaxScaling);
}

Scaling equilibrate(Reduced& red, const SolverSettings& settings) {
  Scaling s{Vector::Ones(red.n), Vector::Ones(red.m), 1.0};
  if (settings.scaling) {
    for (int pass = 0; pass < settings.scaling_passes; ++pass) {
      Vector colnorm = Vector::Zero(red.n);
      Vector rownorm = Vector::Zero(red.m);
      for (Index k = 0; k < red.A.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(red.A, k); it; ++it) {
          const double a = std::abs(it.value());
          colnorm(it.col()) = std::max(colnorm(it.col()), a);
          rownorm(it.row()) = std::max(rownorm(it.row()), a);
        }
      }
      for (const ConeBlock& b : red.cones) rownorm.segment(b.start, b.size).setConstant(rownorm.segment(b.start, b.size).maxCoeff());
      Vector d(red.n), e(red.m);
      for (Index j = 0; j < red.n; ++j) d(j) = 1.0 / std::sqrt(clamp_norm(colnorm(j)));
      for (Index i = 0; i < red.m; ++i) e(i) = 1.0 / std::sqrt(clamp_norm(rownorm(i)));
      red.A = e.asDiagonal() * red.A * d.asDiagonal();
      s.D.array() *= d.array();
      s.E.array() *= e.array();
    }
    const double cnorm = (s.D.asDiagonal() * red.c).lpNorm<Eigen::Infinity>();
    s.cost = cnorm > kMinScaling ? 1.0 / std::min(cnorm, kMaxScaling) : 1.0;
  }
  red.c = s.cost * (s.D.asDiagonal() * red.c);
  for (Index i = 0; i < red.m; ++i) {
    if (red.in_cone[static_cast<std::size_t>(i)]) continue;
    red.lower(i) *= s.E(i);
    red.upper(i) *= s.E(i);
  }
  for (ConeBlock& b : red.cones) b.shift *= s.E(b.start);
  return s;
}

// ---------------------------------------------------------------------------

class Admm {
 public:
  Admm(const Reduced& red, const Scaling& scaling, const SolverSettings& settings)
      : red_(red), sc_(scaling), set_(settings), n_(red.n), m_(red.m) {
    x_ = Vector::Zero(n_);
    z_ = Vector::Zero(m_);
    y_ = Vector::Zero(m_);
    rho_ = settings.step_rho;
    build_rho_vector();
    build_kkt();
    ldlt_.analyzePattern(kkt_);
    factorize();
  }

  void warm_start(const Vector& x_hat) {
    x_ = x_hat;
    z_ = red_.A * x_;
    project(z_);
  }

  struct Check {
    double rp = 0, rd = 0, gap = 0, eps_p = 0, eps_d = 0, eps_g = 0, pobj = 0, dobj = 0;
    bool converged() const { return rp <= eps_p && rd <= eps_d && gap <= eps_g; }
    double merit() const { return std::max({rp / eps_p, rd / eps_d, gap / eps_g}); }
  };

  SocpSolution run() {
    SocpSolution sol;
    Vector rhs(n_ + m_), sol_kkt(n_ + m_);
    Vector x_tilde(n_), z_tilde(m_), z_prev(m_), y_prev(m_), x_prev(n_), z_relaxed(m_);
    const double alpha = set_.over_relaxation;
    Vector best_x = x_, best_z = z_, best_y = y_;
    Check best_check;
    double best_merit = kInf;
    int iter = 0;
    const int adapt_every = std::max(1, set_.check_every) * 5;
    for (iter = 1; iter <= set_.max_iters; ++iter) {
      x_prev = x_;
      y_prev = y_;
      rhs.head(n_) = kSigma * x_ - red_.c;
      rhs.tail(m_) = z_ - rho_inv_.cwiseProduct(y_);
      sol_kkt = ldlt_.solve(rhs);
      x_tilde = sol_kkt.head(n_);
      z_tilde = z_ + rho_inv_.cwiseProduct(sol_kkt.tail(m_) - y_);
      x_ = alpha * x_tilde + (1.0 - alpha) * x_;
      z_prev = z_;
      z_relaxed = alpha * z_tilde + (1.0 - alpha) * z_prev;
      z_ = z_relaxed + rho_inv_.cwiseProduct(y_);
      project(z_);
      y_ += rho_vec_.cwiseProduct(z_relaxed - z_);

      const bool last = iter == set_.max_iters;
      if (iter % set_.check_every != 0 && !last) continue;
      const Check chk = check();
      if (set_.trace) {
        *set_.trace << iter << ',' << chk.rp << ',' << chk.rd << ',' << chk.gap << ',' << rho_ << '\n';
      }
      if (chk.merit() < best_merit) {
        best_merit = chk.merit();
        best_check = chk;
        best_x = x_;
        best_z = z_;
        best_y = y_;
      }
      if (chk.converged()) {
        sol.status = SolveStatus::optimal;
        return finish(sol, chk, iter);
      }
      if (primal_infeasible(y_ - y_prev)) {
        sol.status = SolveStatus::infeasible;
        return finish(sol, chk, iter);
      }
      if (dual_infeasible(x_ - x_prev)) {
        sol.status = SolveStatus::unbounded;
        return finish(sol, chk, iter);
      }
      if (set_.adaptive_rho && iter % adapt_every == 0) adapt_rho();
    }
    x_ = best_x;
    z_ = best_z;
    y_ = best_y;
    sol.status = SolveStatus::iteration_limit;
    return finish(sol, best_check, set_.max_iters);
  }

  const Vector& x() const { return x_; }
  const Vector& y() const { return y_; }

 private:
  void build_rho_vector() {
    rho_vec_.resize(m_);
    for (Index i = 0; i < m_; ++i) {
      const double l = red_.lower(i), u = red_.upper(i);
      if (red_.in_cone[static_cast<std::size_t>(i)]) {
        rho_vec_(i) = rho_;
      } else if (l == u) {
        rho_vec_(i) = kRhoEqualityFactor * rho_;
      } else if (!std::isfinite(l) && !std::isfinite(u)) {
        rho_vec_(i) = kRhoMin;
      } else {
        rho_vec_(i) = rho_;
      }
    }
    rho_inv_ = rho_vec_.cwiseInverse();
  }

  void build_kkt() {
    std::vector<Triplet> trip;
    trip.reserve(static_cast<std::size_t>(n_ + m_ + red_.A.nonZeros()));
    for (Index j = 0; j < n_; ++j) trip.emplace_back(j, j, kSigma);
    for (Index k = 0; k < red_.A.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(red_.A, k); it; ++it) trip.emplace_back(n_ + it.row(), it.col(), it.value());
    for (Index i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, -rho_inv_(i));
    kkt_.resize(n_ + m_, n_ + m_);
    kkt_.setFromTriplets(trip.begin(), trip.end());
  }

  void factorize() {
    for (Index i = 0; i < m_; ++i) kkt_.coeffRef(n_ + i, n_ + i) = -rho_inv_(i);
    ldlt_.factorize(kkt_);
    if (ldlt_.info() != Eigen::Success) throw std::runtime_error("KKT factorization failed");
  }

  void project(Vector& v) const {
    for (Index i = 0; i < m_; ++i)
      if (!red_.in_cone[static_cast<std::size_t>(i)]) v(i) = project_interval(v(i), red_.lower(i), red_.upper(i));
    for (const ConeBlock& b : red_.cones) {
      auto seg = v.segment(b.start, b.size);
      seg -= b.shift;
      project_soc_inplace(seg);
      seg += b.shift;
    }
  }

  // Support function of the scaled constraint set, ignoring components that
  // would make it infinite (they are bounded by the dual residual).
  double support(const Vector& y) const {
    double s = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (red_.in_cone[static_cast<std::size_t>(i)]) continue;
      if (y(i) > 0 && std::isfinite(red_.upper(i))) s += red_.upper(i) * y(i);
      if (y(i) < 0 && std::isfinite(red_.lower(i))) s += red_.lower(i) * y(i);
    }
    for (const ConeBlock& b : red_.cones) s += b.shift.dot(y.segment(b.start, b.size));
    return s;
  }

  Check check() const {
    Check c;
    const Vector ax = red_.A * x_;
    const Vector aty = red_.A.transpose() * y_;
    const Vector einv = sc_.E.cwiseInverse();
    const Vector dinv = sc_.D.cwiseInverse();
    const double kinv = 1.0 / sc_.cost;
    c.rp = m_ ? einv.cwiseProduct(ax - z_).lpNorm<Eigen::Infinity>() : 0.0;
    c.rd = kinv * dinv.cwiseProduct(red_.c + aty).lpNorm<Eigen::Infinity>();
    const double nax = m_ ? einv.cwiseProduct(ax).lpNorm<Eigen::Infinity>() : 0.0;
    const double nz = m_ ? einv.cwiseProduct(z_).lpNorm<Eigen::Infinity>() : 0.0;
    const double naty = kinv * dinv.cwiseProduct(aty).lpNorm<Eigen::Infinity>();
    const double nc = kinv * dinv.cwiseProduct(red_.c).lpNorm<Eigen::Infinity>();
    c.eps_p = set_.eps_primal * (1.0 + std::max(nax, nz));
    c.eps_d = set_.eps_dual * (1.0 + std::max(naty, nc));
    c.pobj = kinv * red_.c.dot(x_);
    c.dobj = -kinv * support(y_);
    c.gap = std::abs(c.pobj - c.dobj);
    c.eps_g = set_.eps_gap * (1.0 + std::abs(c.pobj) + std::abs(c.dobj));
    return c;
  }

  bool primal_infeasible(const Vector& dy) const {
    const double ndy = sc_.E.cwiseProduct(dy).lpNorm<Eigen::Infinity>();
    if (!(ndy > set_.eps_infeasible)) return false;
    const Vector atdy = sc_.D.cwiseInverse().cwiseProduct(red_.A.transpose() * dy);
    if (atdy.lpNorm<Eigen::Infinity>() > set_.eps_infeasible * ndy) return false;
    double s = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (red_.in_cone[static_cast<std::size_t>(i)]) continue;
      if (dy(i) > 0) {
        if (!std::isfinite(red_.upper(i))) {
          if (dy(i) * sc_.E(i) > set_.eps_infeasible * ndy) return false;
        } else {
          s += red_.upper(i) * dy(i);
        }
      } else if (dy(i) < 0) {
        if (!std::isfinite(red_.lower(i))) {
          if (-dy(i) * sc_.E(i) > set_.eps_infeasible * ndy) return false;
        } else {
          s += red_.lower(i) * dy(i);
        }
      }
    }
    for (const ConeBlock& b : red_.cones) {
      const Vector seg = -dy.segment(b.start, b.size);
      if (!in_soc(seg, set_.eps_infeasible * ndy / sc_.E(b.start))) return false;
      s += b.shift.dot(dy.segment(b.start, b.size));
    }
    return s < -set_.eps_infeasible * ndy;
  }

  bool dual_infeasible(const Vector& dx) const {
    const double ndx = sc_.D.cwiseProduct(dx).lpNorm<Eigen::Infinity>();
    if (!(ndx > set_.eps_infeasible)) return false;
    if (red_.c.dot(dx) / sc_.cost >= -set_.eps_infeasible * ndx) return false;
    const Vector adx = red_.A * dx;
    const double tol = set_.eps_infeasible * ndx;
    for (Index i = 0; i < m_; ++i) {
      if (red_.in_cone[static_cast<std::size_t>(i)]) continue;
      const double v = adx(i) / sc_.E(i);
      if (std::isfinite(red_.upper(i)) && v > tol) return false;
      if (std::isfinite(red_.lower(i)) && v < -tol) return false;
    }
    for (const ConeBlock& b : red_.cones) {
      if (!in_soc(adx.segment(b.start, b.size) / sc_.E(b.start), tol)) return false;
    }
    return true;
  }

  void adapt_rho() {
    const Vector ax = red_.A * x_;
    const Vector aty = red_.A.transpose() * y_;
    const double rp = (ax - z_).lpNorm<Eigen::Infinity>();
    const double rd = (red_.c + aty).lpNorm<Eigen::Infinity>();
    const double np = std::max(ax.lpNorm<Eigen::Infinity>(), z_.lpNorm<Eigen::Infinity>()) + 1e-12;
    const double nd = std::max(aty.lpNorm<Eigen::Infinity>(), red_.c.lpNorm<Eigen::Infinity>()) + 1e-12;
    double ratio = std::sqrt((rp / np) / (rd / nd + 1e-30));
    if (!std::isfinite(ratio) || ratio <= 0) return;
    const double rho_new = std::clamp(rho_ * ratio, kRhoMin, kRhoMax);
    if (rho_new > 5.0 * rho_ || rho_new < 0.2 * rho_) {
      rho_ = rho_new;
      build_rho_vector();
      factorize();
    }
  }

  SocpSolution& finish(SocpSolution& sol, const Check& chk, int iter) {
    sol.primal_residual = chk.rp / (chk.eps_p / set_.eps_primal);
    sol.dual_residual = chk.rd / (chk.eps_d / set_.eps_dual);
    sol.duality_gap = chk.gap / (chk.eps_g / set_.eps_gap);
    sol.iters = iter;
    return sol;
  }

  const Reduced& red_;
  const Scaling& sc_;
  const SolverSettings& set_;
  Index n_, m_;
  Vector x_, z_, y_;
  double rho_ = 1.0;
  Vector rho_vec_, rho_inv_;
  SparseMatrix kkt_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

double env_double(const char* name, double fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const double d = std::strtod(v, &end);
  return (end && *end == '\0' && d > 0) ? d : fallback;
}

}  // namespace

SolverSettings settings_from_environment(SolverSettings base) {
  base.eps_primal = env_double("RECONF_EPS_PRIMAL", base.eps_primal);
  base.eps_dual = env_double("RECONF_EPS_DUAL", base.eps_dual);
  base.eps_gap = env_double("RECONF_EPS_GAP", base.eps_gap);
  base.max_iters = static_cast<int>(env_double("RECONF_MAX_ITERS", base.max_iters));
  return base;
}

std::string to_string(SolverMethod method) {
  return method == SolverMethod::interior_point ? "interior-point" : "operator-splitting";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration-limit";
  }
  return "unknown";
}

SocpSolution solve(const ConicProgram& program, const SolverSettings& settings, const Vector* initial_x) {
  program.validate();
  if (!(settings.eps_primal > 0) || !(settings.eps_dual > 0) || !(settings.eps_gap > 0) || settings.max_iters < 1)
    throw std::invalid_argument("solver tolerances must be positive and max_iters >= 1");
  if (initial_x && initial_x->size() != program.n_vars) throw std::invalid_argument("initial point has wrong length");

  SocpSolution sol;
  sol.y = Vector::Zero(program.eq_matrix.rows());
  const Presolve pre = Presolver(program).run();
  if (pre.infeasible) {
    sol.status = SolveStatus::infeasible;
    sol.x = pre.value;
    return sol;
  }
  Reduced red = build_reduced(program, pre);
  sol.x = pre.value;

  if (red.n == 0) {
    // Everything fixed; remaining rows hold constants only.
    Vector z = Vector::Zero(red.m);
    double worst = 0.0;
    for (Index i = 0; i < red.m; ++i)
      if (!red.in_cone[static_cast<std::size_t>(i)])
        worst = std::max({worst, red.lower(i) - z(i), z(i) - red.upper(i)});
    for (const ConeBlock& b : red.cones)
      if (!in_soc(Vector(-b.shift), kFeasTol)) worst = kInf;
    sol.status = worst <= kFeasTol ? SolveStatus::optimal : SolveStatus::infeasible;
    sol.objective = program.objective_value(sol.x);
    return sol;
  }

  const Scaling scaling = equilibrate(red, settings);
  Vector x_hat, y_hat;
  SocpSolution inner;
  if (settings.method == SolverMethod::interior_point) {
    inner = solve_interior_point(red, scaling, settings, x_hat, y_hat);
  } else {
    Admm admm(red, scaling, settings);
    if (initial_x) {
      Vector xr(red.n);
      for (Index k = 0; k < red.n; ++k) xr(k) = (*initial_x)(red.var_of[static_cast<std::size_t>(k)]) / scaling.D(k);
      admm.warm_start(xr);
    }
    inner = admm.run();
    x_hat = admm.x();
    y_hat = admm.y();
  }
  sol.status = inner.status;
  sol.primal_residual = inner.primal_residual;
  sol.dual_residual = inner.dual_residual;
  sol.duality_gap = inner.duality_gap;
  sol.iters = inner.iters;

  const Vector xr = scaling.D.cwiseProduct(x_hat);
  for (Index k = 0; k < red.n; ++k) sol.x(red.var_of[static_cast<std::size_t>(k)]) = xr(k);
  const Vector yr = scaling.E.cwiseProduct(y_hat) / scaling.cost;
  for (Index i = 0; i < red.m; ++i) {
    const Index r = red.eq_row_of[static_cast<std::size_t>(i)];
    if (r >= 0) sol.y(r) = yr(i);
  }
  sol.objective = program.objective_value(sol.x);
  return sol;
}

}  // namespace reconf
