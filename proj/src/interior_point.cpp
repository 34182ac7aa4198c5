#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "quasidefinite_ldl.hpp"
#include "socp_internal.hpp"

namespace reconf::detail {

namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Dense = Eigen::MatrixXd;

constexpr double kStaticReg = 1e-9;
constexpr double kPivotThreshold = 1e-13;
constexpr double kDynamicReg = 1e-5;
constexpr double kStepFactor = 0.99;
constexpr int kRefineSteps = 8;

// Layout of the slack and its dual: n_lin orthant entries followed by
// second-order blocks.
struct ConeLayout {
  Index n_lin = 0;
  std::vector<Index> start;
  std::vector<Index> size;
  Index dim = 0;

  int degree() const { return static_cast<int>(n_lin + static_cast<Index>(start.size())); }
};

double soc_det(const Eigen::Ref<const Vector>& v) { return v(0) * v(0) - v.tail(v.size() - 1).squaredNorm(); }

double min_eigenvalue(const ConeLayout& k, const Vector& v) {
  double m = kInf;
  for (Index i = 0; i < k.n_lin; ++i) m = std::min(m, v(i));
  for (std::size_t b = 0; b < k.start.size(); ++b) {
    const auto seg = v.segment(k.start[b], k.size[b]);
    m = std::min(m, seg(0) - seg.tail(seg.size() - 1).norm());
  }
  return m;
}

void add_identity(const ConeLayout& k, Vector& v, double a) {
  v.head(k.n_lin).array() += a;
  for (Index s : k.start) v(s) += a;
}

Vector jordan(const ConeLayout& k, const Vector& u, const Vector& v) {
  Vector out(k.dim);
  out.head(k.n_lin) = u.head(k.n_lin).cwiseProduct(v.head(k.n_lin));
  for (std::size_t b = 0; b < k.start.size(); ++b) {
    const Index s = k.start[b], p = k.size[b];
    const auto us = u.segment(s, p), vs = v.segment(s, p);
    out(s) = us.dot(vs);
    out.segment(s + 1, p - 1) = us(0) * vs.tail(p - 1) + vs(0) * us.tail(p - 1);
  }
  return out;
}

// w with lambda o w = v.
Vector jordan_divide(const ConeLayout& k, const Vector& lambda, const Vector& v) {
  Vector out(k.dim);
  out.head(k.n_lin) = v.head(k.n_lin).cwiseQuotient(lambda.head(k.n_lin));
  for (std::size_t b = 0; b < k.start.size(); ++b) {
    const Index s = k.start[b], p = k.size[b];
    const auto l = lambda.segment(s, p), vs = v.segment(s, p);
    const double rho = soc_det(l);
    const double w0 = (l(0) * vs(0) - l.tail(p - 1).dot(vs.tail(p - 1))) / rho;
    out(s) = w0;
    out.segment(s + 1, p - 1) = (vs.tail(p - 1) - w0 * l.tail(p - 1)) / l(0);
  }
  return out;
}

// Largest a >= 0 with v + a dv in the cone (infinite when unbounded).
double max_step(const ConeLayout& k, const Vector& v, const Vector& dv) {
  double a = kInf;
  for (Index i = 0; i < k.n_lin; ++i)
    if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
  for (std::size_t b = 0; b < k.start.size(); ++b) {
    const Index s = k.start[b], p = k.size[b];
    const auto u = v.segment(s, p), d = dv.segment(s, p);
    const double qa = soc_det(d);
    const double qb = u(0) * d(0) - u.tail(p - 1).dot(d.tail(p - 1));
    const double qc = std::max(soc_det(u), 0.0);
    const double disc = qb * qb - qa * qc;
    double root = kInf;
    if (qa > 0) {
      if (qb < 0 && disc >= 0) root = qc / (-qb + std::sqrt(disc));
    } else if (qa == 0) {
      if (qb < 0) root = -qc / (2.0 * qb);
    } else {
      root = qc / (-qb + std::sqrt(std::max(disc, 0.0)));
    }
    a = std::min(a, root);
  }
  return a;
}

struct NtScaling {
  Vector w_lin;
  std::vector<Dense> w;
  std::vector<Dense> w_inv;
  Vector lambda;
};

NtScaling nt_scaling(const ConeLayout& k, const Vector& s, const Vector& z) {
  NtScaling nt;
  nt.w_lin = s.head(k.n_lin).cwiseQuotient(z.head(k.n_lin)).cwiseSqrt();
  nt.lambda.resize(k.dim);
  nt.lambda.head(k.n_lin) = s.head(k.n_lin).cwiseProduct(z.head(k.n_lin)).cwiseSqrt();
  for (std::size_t b = 0; b < k.start.size(); ++b) {
    const Index st = k.start[b], p = k.size[b];
    const auto ss = s.segment(st, p), zs = z.segment(st, p);
    const double sdet = std::sqrt(std::max(soc_det(ss), 1e-300));
    const double zdet = std::sqrt(std::max(soc_det(zs), 1e-300));
    const Vector sb = ss / sdet, zb = zs / zdet;
    const double gamma = std::sqrt(std::max((1.0 + sb.dot(zb)) / 2.0, 1e-300));
    Vector wb(p);
    wb(0) = (sb(0) + zb(0)) / (2.0 * gamma);
    wb.tail(p - 1) = (sb.tail(p - 1) - zb.tail(p - 1)) / (2.0 * gamma);
    const double eta = std::sqrt(sdet / zdet);
    const Vector w1 = wb.tail(p - 1);
    Dense core = Dense::Identity(p - 1, p - 1) + w1 * w1.transpose() / (1.0 + wb(0));
    Dense W(p, p), Winv(p, p);
    W(0, 0) = wb(0);
    W.block(0, 1, 1, p - 1) = w1.transpose();
    W.block(1, 0, p - 1, 1) = w1;
    W.block(1, 1, p - 1, p - 1) = core;
    Winv = W;
    Winv.block(0, 1, 1, p - 1) *= -1.0;
    Winv.block(1, 0, p - 1, 1) *= -1.0;
    W *= eta;
    Winv /= eta;
    nt.lambda.segment(st, p) = W * zs;
    nt.w.push_back(std::move(W));
    nt.w_inv.push_back(std::move(Winv));
  }
  return nt;
}

Vector apply_w(const ConeLayout& k, const NtScaling& nt, const Vector& v, bool inverse) {
  Vector out(k.dim);
  if (inverse) {
    out.head(k.n_lin) = v.head(k.n_lin).cwiseQuotient(nt.w_lin);
  } else {
    out.head(k.n_lin) = v.head(k.n_lin).cwiseProduct(nt.w_lin);
  }
  for (std::size_t b = 0; b < k.start.size(); ++b)
    out.segment(k.start[b], k.size[b]) = (inverse ? nt.w_inv[b] : nt.w[b]) * v.segment(k.start[b], k.size[b]);
  return out;
}

class InteriorPoint {
 public:
  InteriorPoint(const Reduced& red, const Scaling& sc, const SolverSettings& set) : red_(red), sc_(sc), set_(set) {
    split_rows();
  }

  SocpSolution run(Vector& x_hat, Vector& y_hat) {
    SocpSolution sol;
    initialize();
    const int cap = std::min(set_.max_iters, kMaxInteriorPointIters);
    Check best;
    Vector bx = x_, by = y_, bz = z_, bs = s_;
    double btau = tau_, bkappa = kappa_;
    for (int iter = 0;; ++iter) {
      const Check chk = check();
      if (set_.trace)
        *set_.trace << iter << ',' << chk.pres << ',' << chk.dres << ',' << chk.gap << ',' << chk.mu << '\n';
      if (chk.merit() < best.merit()) {
        best = chk;
        bx = x_, by = y_, bz = z_, bs = s_;
        btau = tau_, bkappa = kappa_;
      }
      sol.iters = iter;
      if (chk.converged()) {
        sol.status = SolveStatus::optimal;
        break;
      }
      if (chk.primal_infeasible) {
        sol.status = SolveStatus::infeasible;
        break;
      }
      if (chk.dual_infeasible) {
        sol.status = SolveStatus::unbounded;
        break;
      }
      if (iter >= cap || !step()) {
        x_ = bx, y_ = by, z_ = bz, s_ = bs;
        tau_ = btau, kappa_ = bkappa;
        sol.status = SolveStatus::iteration_limit;
        break;
      }
    }
    const Check fin = check();
    sol.primal_residual = fin.pres / (fin.eps_p / set_.eps_primal);
    sol.dual_residual = fin.dres / (fin.eps_d / set_.eps_dual);
    sol.duality_gap = fin.gap / (fin.eps_g / set_.eps_gap);
    export_iterate(sol.status, x_hat, y_hat);
    return sol;
  }

 private:
  struct Check {
    double pres = kInf, dres = kInf, gap = kInf, mu = 0;
    double eps_p = 1, eps_d = 1, eps_g = 1;
    bool primal_infeasible = false, dual_infeasible = false;
    bool converged() const { return pres <= eps_p && dres <= eps_d && gap <= eps_g; }
    double merit() const { return std::max({pres / eps_p, dres / eps_d, gap / eps_g}); }
  };

  // Constraint form A_eq x = b, G x + s = h, s in K.
  void split_rows() {
    const RowMatrix rows(red_.A);
    n_ = red_.n;
    std::vector<Triplet> ta, tg;
    std::vector<double> b, h;
    for (Index i = 0; i < red_.m; ++i) {
      if (red_.in_cone[static_cast<std::size_t>(i)]) continue;
      const double l = red_.lower(i), u = red_.upper(i);
      if (l == u) {
        for (RowMatrix::InnerIterator it(rows, i); it; ++it) ta.emplace_back(b.size(), it.col(), it.value());
        b.push_back(l);
        eq_of_.push_back(i);
        continue;
      }
      if (std::isfinite(u)) {
        for (RowMatrix::InnerIterator it(rows, i); it; ++it) tg.emplace_back(h.size(), it.col(), it.value());
        h.push_back(u);
        g_of_.push_back(i);
        g_sign_.push_back(1.0);
      }
      if (std::isfinite(l)) {
        for (RowMatrix::InnerIterator it(rows, i); it; ++it) tg.emplace_back(h.size(), it.col(), -it.value());
        h.push_back(-l);
        g_of_.push_back(i);
        g_sign_.push_back(-1.0);
      }
    }
    cones_.n_lin = static_cast<Index>(h.size());
    for (const ConeBlock& blk : red_.cones) {
      cones_.start.push_back(static_cast<Index>(h.size()));
      cones_.size.push_back(blk.size);
      for (Index r = 0; r < blk.size; ++r) {
        for (RowMatrix::InnerIterator it(rows, blk.start + r); it; ++it)
          tg.emplace_back(h.size(), it.col(), -it.value());
        h.push_back(-blk.shift(r));
        g_of_.push_back(blk.start + r);
        g_sign_.push_back(-1.0);
      }
    }
    cones_.dim = static_cast<Index>(h.size());
    p_ = static_cast<Index>(b.size());
    A_.resize(p_, n_);
    A_.setFromTriplets(ta.begin(), ta.end());
    G_.resize(cones_.dim, n_);
    G_.setFromTriplets(tg.begin(), tg.end());
    b_ = Eigen::Map<Vector>(b.data(), p_);
    h_ = Eigen::Map<Vector>(h.data(), cones_.dim);
    At_ = A_.transpose();
    Gt_ = G_.transpose();

    e_eq_.resize(p_);
    for (Index r = 0; r < p_; ++r) e_eq_(r) = sc_.E(eq_of_[static_cast<std::size_t>(r)]);
    e_g_.resize(cones_.dim);
    for (Index r = 0; r < cones_.dim; ++r) e_g_(r) = sc_.E(g_of_[static_cast<std::size_t>(r)]);
    b_norm_ = p_ ? b_.cwiseQuotient(e_eq_).lpNorm<Eigen::Infinity>() : 0.0;
    h_norm_ = cones_.dim ? h_.cwiseQuotient(e_g_).lpNorm<Eigen::Infinity>() : 0.0;
    c_norm_ = red_.c.cwiseQuotient(sc_.D).lpNorm<Eigen::Infinity>() / sc_.cost;
  }

  Index n_kkt() const { return n_ + p_ + cones_.dim; }

  bool factor(const NtScaling* nt) {
    assemble(nt, kStaticReg);
    if (!analyzed_) {
      std::vector<int> signs(static_cast<std::size_t>(n_kkt()), -1);
      std::fill(signs.begin(), signs.begin() + n_, 1);
      ldl_.analyze(kkt_, std::move(signs));
      analyzed_ = true;
    }
    ldl_.factorize(kkt_, kPivotThreshold, kDynamicReg);
    if (!Eigen::Map<const Vector>(kkt_.valuePtr(), kkt_.nonZeros()).allFinite()) return false;
    if (nt) {
      nt_ = *nt;
    } else {
      nt_.reset();
    }
    return true;
  }

  void assemble(const NtScaling* nt, double reg) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(n_kkt() + A_.nonZeros() + G_.nonZeros() + 16 * cones_.start.size()));
    for (Index j = 0; j < n_; ++j) t.emplace_back(j, j, reg);
    for (Index k = 0; k < A_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(A_, k); it; ++it) t.emplace_back(n_ + it.row(), it.col(), it.value());
    for (Index r = 0; r < p_; ++r) t.emplace_back(n_ + r, n_ + r, -reg);
    const Index off = n_ + p_;
    for (Index k = 0; k < G_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(G_, k); it; ++it) t.emplace_back(off + it.row(), it.col(), it.value());
    for (Index i = 0; i < cones_.n_lin; ++i) {
      const double w = nt ? nt->w_lin(i) : 1.0;
      t.emplace_back(off + i, off + i, -w * w - reg);
    }
    for (std::size_t b = 0; b < cones_.start.size(); ++b) {
      const Index st = cones_.start[b], p = cones_.size[b];
      const Dense w2 = nt ? Dense(nt->w[b] * nt->w[b]) : Dense(Dense::Identity(p, p));
      for (Index r = 0; r < p; ++r)
        for (Index c = 0; c <= r; ++c) t.emplace_back(off + st + r, off + st + c, -w2(r, c) - (r == c ? reg : 0.0));
    }
    kkt_.resize(n_kkt(), n_kkt());
    kkt_.setFromTriplets(t.begin(), t.end());
  }

  Vector apply_w2(const Vector& v) const {
    if (!nt_) return v;
    return apply_w(cones_, *nt_, apply_w(cones_, *nt_, v, false), false);
  }

  Vector apply_kkt(const Vector& v) const {
    Vector out(n_kkt());
    const auto vx = v.head(n_), vy = v.segment(n_, p_), vz = v.tail(cones_.dim);
    out.head(n_) = At_ * vy + Gt_ * vz;
    out.segment(n_, p_) = A_ * vx;
    out.tail(cones_.dim) = G_ * vx - apply_w2(vz);
    return out;
  }

  Vector solve_kkt(const Vector& rhs) const {
    Vector sol = ldl_.solve(rhs);
    const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
    double prev = kInf;
    for (int k = 0; k < kRefineSteps; ++k) {
      const Vector r = rhs - apply_kkt(sol);
      const double nr = r.lpNorm<Eigen::Infinity>();
      if (nr <= 1e-14 * scale || nr >= prev) break;
      prev = nr;
      sol += ldl_.solve(r);
    }
    return sol;
  }

  Vector stack(const Vector& a, const Vector& b, const Vector& c) const {
    Vector v(n_kkt());
    v << a, b, c;
    return v;
  }

  void initialize() {
    if (!factor(nullptr)) throw std::runtime_error("interior-point KKT factorization failed");
    const Vector p0 = solve_kkt(stack(Vector::Zero(n_), b_, h_));
    x_ = p0.head(n_);
    s_ = -p0.tail(cones_.dim);
    const Vector d0 = solve_kkt(stack(-red_.c, Vector::Zero(p_), Vector::Zero(cones_.dim)));
    y_ = d0.segment(n_, p_);
    z_ = d0.tail(cones_.dim);
    for (Vector* v : {&s_, &z_}) {
      const double a = -min_eigenvalue(cones_, *v);
      if (a > -1.0) add_identity(cones_, *v, 1.0 + a);
    }
    tau_ = 1.0;
    kappa_ = 1.0;
  }

  Check check() const {
    Check c;
    const Vector rx = At_ * y_ + Gt_ * z_ + red_.c * tau_;
    const Vector ry = A_ * x_ - b_ * tau_;
    const Vector rz = s_ + G_ * x_ - h_ * tau_;
    const double k = sc_.cost;
    const double pres_eq = p_ ? ry.cwiseQuotient(e_eq_).lpNorm<Eigen::Infinity>() : 0.0;
    const double pres_g = cones_.dim ? rz.cwiseQuotient(e_g_).lpNorm<Eigen::Infinity>() : 0.0;
    c.pres = std::max(pres_eq, pres_g) / tau_;
    c.dres = rx.cwiseQuotient(sc_.D).lpNorm<Eigen::Infinity>() / (k * tau_);
    const double cx = red_.c.dot(x_);
    const double by_hz = b_.dot(y_) + h_.dot(z_);
    const double pcost = cx / (k * tau_);
    const double dcost = -by_hz / (k * tau_);
    const double sz = s_.dot(z_);
    c.gap = std::max(std::abs(pcost - dcost), sz / (k * tau_ * tau_));
    c.mu = (sz + tau_ * kappa_) / (cones_.degree() + 1);
    c.eps_p = set_.eps_primal * (1.0 + std::max(b_norm_, h_norm_));
    c.eps_d = set_.eps_dual * (1.0 + c_norm_);
    c.eps_g = set_.eps_gap * (1.0 + std::abs(pcost) + std::abs(dcost));

    const double feas = std::max(set_.eps_primal, set_.eps_infeasible);
    if (by_hz < 0) {
      const double cert = (At_ * y_ + Gt_ * z_).cwiseQuotient(sc_.D).lpNorm<Eigen::Infinity>();
      const double scale = -by_hz / std::max(1.0, std::max(y_.lpNorm<Eigen::Infinity>(), z_.lpNorm<Eigen::Infinity>()));
      c.primal_infeasible = cert / -by_hz < feas && scale > feas && tau_ < kappa_;
    }
    if (cx < 0) {
      const double ax = p_ ? (A_ * x_).cwiseQuotient(e_eq_).lpNorm<Eigen::Infinity>() : 0.0;
      const double gx = cones_.dim ? (G_ * x_ + s_).cwiseQuotient(e_g_).lpNorm<Eigen::Infinity>() : 0.0;
      c.dual_infeasible = std::max(ax, gx) / -cx < feas && tau_ < kappa_;
    }
    return c;
  }

  struct Direction {
    Vector dx, dy, dz, ds;
    double dtau = 0, dkappa = 0;
  };

  // Newton direction for residual weight (1 - gamma), complementarity targets ds_target and dk_target.
  Direction newton(const NtScaling& nt, const Vector& d1, double den, double weight, const Vector& ds_target,
                   double dk_target, const Vector& rx, const Vector& ry, const Vector& rz, double rt) const {
    const Vector u = jordan_divide(cones_, nt.lambda, ds_target);
    const Vector wu = apply_w(cones_, nt, u, false);
    const Vector d2 = solve_kkt(stack(-weight * rx, -weight * ry, -weight * rz - wu));
    const double num = -weight * rt - dk_target / tau_ - red_.c.dot(d2.head(n_)) - b_.dot(d2.segment(n_, p_)) -
                       h_.dot(d2.tail(cones_.dim));
    Direction d;
    d.dtau = num / den;
    const Vector full = d2 + d.dtau * d1;
    d.dx = full.head(n_);
    d.dy = full.segment(n_, p_);
    d.dz = full.tail(cones_.dim);
    d.ds = wu - apply_w(cones_, nt, apply_w(cones_, nt, d.dz, false), false);
    d.dkappa = (dk_target - kappa_ * d.dtau) / tau_;
    return d;
  }

  double step_length(const Direction& d) const {
    double a = std::min(max_step(cones_, s_, d.ds), max_step(cones_, z_, d.dz));
    if (d.dtau < 0) a = std::min(a, -tau_ / d.dtau);
    if (d.dkappa < 0) a = std::min(a, -kappa_ / d.dkappa);
    return a;
  }

  bool step() {
    const NtScaling nt = nt_scaling(cones_, s_, z_);
    if (!factor(&nt)) return false;
    const Vector rx = At_ * y_ + Gt_ * z_ + red_.c * tau_;
    const Vector ry = A_ * x_ - b_ * tau_;
    const Vector rz = s_ + G_ * x_ - h_ * tau_;
    const double rt = kappa_ + red_.c.dot(x_) + b_.dot(y_) + h_.dot(z_);

    const Vector d1 = solve_kkt(stack(-red_.c, b_, h_));
    const double den =
        red_.c.dot(d1.head(n_)) + b_.dot(d1.segment(n_, p_)) + h_.dot(d1.tail(cones_.dim)) - kappa_ / tau_;

    const Vector ll = jordan(cones_, nt.lambda, nt.lambda);
    const Direction aff = newton(nt, d1, den, 1.0, -ll, -kappa_ * tau_, rx, ry, rz, rt);
    const double a_aff = std::min(1.0, step_length(aff));
    const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 0.0, 1.0);
    const double mu = (s_.dot(z_) + tau_ * kappa_) / (cones_.degree() + 1);

    Vector target = -ll - jordan(cones_, apply_w(cones_, nt, aff.ds, true), apply_w(cones_, nt, aff.dz, false));
    add_identity(cones_, target, sigma * mu);
    const double dk_target = -kappa_ * tau_ - aff.dkappa * aff.dtau + sigma * mu;
    const Direction d = newton(nt, d1, den, 1.0 - sigma, target, dk_target, rx, ry, rz, rt);
    const double a = std::min(1.0, kStepFactor * step_length(d));
    if (!(a > 1e-12) || !d.dx.allFinite()) return false;
    x_ += a * d.dx;
    y_ += a * d.dy;
    z_ += a * d.dz;
    s_ += a * d.ds;
    tau_ += a * d.dtau;
    kappa_ += a * d.dkappa;
    return true;
  }

  void export_iterate(SolveStatus status, Vector& x_hat, Vector& y_hat) const {
    const bool certificate = status == SolveStatus::infeasible || status == SolveStatus::unbounded;
    const double t = certificate ? 1.0 : tau_;
    x_hat = x_ / t;
    y_hat = Vector::Zero(red_.m);
    for (Index r = 0; r < p_; ++r) y_hat(eq_of_[static_cast<std::size_t>(r)]) += y_(r) / t;
    for (Index r = 0; r < cones_.dim; ++r)
      y_hat(g_of_[static_cast<std::size_t>(r)]) += g_sign_[static_cast<std::size_t>(r)] * z_(r) / t;
  }

  const Reduced& red_;
  const Scaling& sc_;
  const SolverSettings& set_;

  Index n_ = 0, p_ = 0;
  ConeLayout cones_;
  SparseMatrix A_, G_, At_, Gt_;
  Vector b_, h_, e_eq_, e_g_;
  std::vector<Index> eq_of_, g_of_;
  std::vector<double> g_sign_;
  double b_norm_ = 0, h_norm_ = 0, c_norm_ = 0;

  SparseMatrix kkt_;
  QuasidefiniteLdl ldl_;
  bool analyzed_ = false;
  std::optional<NtScaling> nt_;

  Vector x_, y_, z_, s_;
  double tau_ = 1.0, kappa_ = 1.0;
};

}  // namespace

SocpSolution solve_interior_point(const Reduced& red, const Scaling& scaling, const SolverSettings& settings,
                                  Vector& x_hat, Vector& y_hat) {
  return InteriorPoint(red, scaling, settings).run(x_hat, y_hat);
}

}  // namespace reconf::detail
