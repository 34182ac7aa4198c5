#include "reconf/mbadmm.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace reconf {

namespace {

// Appends w = y - target, s >= 0 and the epigraph 2 s (1/rho) >= ||w||^2, so
// the extra cost s equals (rho/2) ||y - target||^2 at the optimum.
ConicProgram penalized(const ConicProgram& base, const std::vector<Index>& ys, const Vector& target, double rho) {
  ConicProgram p = base;
  const Index m = static_cast<Index>(ys.size());
  const Index w0 = p.n_vars, s = w0 + m, q = s + 1;
  p.n_vars = q + 1;
  p.objective.conservativeResize(p.n_vars);
  p.objective.tail(m + 2).setZero();
  p.objective(s) = 1.0;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(base.eq_matrix.nonZeros() + 2 * m));
  for (Index k = 0; k < base.eq_matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(base.eq_matrix, k); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  const Index rows = base.eq_matrix.rows();
  p.eq_rhs.conservativeResize(rows + m);
  RotatedCone cone{s, q, {}};
  for (Index i = 0; i < m; ++i) {
    trips.emplace_back(rows + i, w0 + i, 1.0);
    trips.emplace_back(rows + i, ys[static_cast<std::size_t>(i)], -1.0);
    p.eq_rhs(rows + i) = -target(i);
    cone.tail.push_back(w0 + i);
  }
  p.eq_matrix.resize(rows + m, p.n_vars);
  p.eq_matrix.setFromTriplets(trips.begin(), trips.end());
  p.nonneg.push_back(s);
  p.boxes.push_back({q, 1.0 / rho, 1.0 / rho});
  p.rotated_cones.push_back(std::move(cone));
  return p;
}

double base_objective(const ConicProgram& base, const Vector& x) { return base.objective.dot(x.head(base.n_vars)); }

Vector gather(const Vector& x, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = x(idx[i]);
  return out;
}

std::uint64_t step_seed(std::uint64_t seed, int iteration) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(iteration + 1);
}

// Hamming distance first, then L1 distance to y, then enumeration order.
SwitchAssignment nearest_radial(const std::vector<SwitchAssignment>& radial, const SwitchAssignment& rounded,
                                const std::vector<int>& ids, const Vector& y) {
  const SwitchAssignment* best = nullptr;
  int best_h = 0;
  double best_l1 = 0.0;
  for (const SwitchAssignment& a : radial) {
    const int h = hamming_distance(a, rounded);
    double l1 = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) l1 += std::abs((a.at(ids[i]) ? 1.0 : 0.0) - y(static_cast<Index>(i)));
    if (!best || h < best_h || (h == best_h && l1 < best_l1)) {
      best = &a;
      best_h = h;
      best_l1 = l1;
    }
  }
  return *best;
}

}  // namespace

void AdmmParams::validate() const {
  if (!(rho > 0)) throw std::invalid_argument("admm rho must be positive");
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("admm threshold must lie in (0, 1)");
  if (max_outer_iters < 1) throw std::invalid_argument("admm max_outer_iters must be >= 1");
  if (!(eps_residual > 0)) throw std::invalid_argument("admm eps_residual must be positive");
  if (anneal_restarts < 1) throw std::invalid_argument("admm anneal_restarts must be >= 1");
}

Qubo build_step_qubo(const Vector& y, const Vector& lambda, double rho) {
  if (y.size() != lambda.size()) throw std::invalid_argument("y and lambda must have equal length");
  const Vector t = y - lambda / rho;
  const Index m = y.size();
  return make_qubo<double>(Eigen::MatrixXd::Zero(m, m), (rho / 2) * (1.0 - 2.0 * t.array()).matrix(),
                           (rho / 2) * t.squaredNorm());
}

QuboSolution solve_qubo(const Qubo& q, QuboMethod method, const AdmmParams& params, std::uint64_t seed) {
  switch (method) {
    case QuboMethod::exhaustive:
      return solve_exhaustive(q);
    case QuboMethod::sa:
      return solve_sa(q, params.anneal, params.anneal_restarts, seed);
    case QuboMethod::qaoa: {
      QaoaParams qp = params.qaoa;
      qp.seed = seed;
      return solve_qaoa(q, qp);
    }
  }
  throw std::invalid_argument("unknown qubo method");
}

AdmmResult solve_admm(const MicpModel& model, const AdmmParams& params) {
  params.validate();
  AdmmResult result;
  const std::vector<Index>& ys = model.binary_vars;
  const std::vector<int>& ids = model.binary_switch_ids;
  const Index m = static_cast<Index>(ys.size());

  auto polish = [&](const SwitchAssignment& assignment) {
    const SocpSolution s = solve(fix_binaries(model, assignment), params.socp);
    result.status = s.status;
    result.assignment = assignment;
    if (s.status != SolveStatus::infeasible && s.status != SolveStatus::unbounded)
      result.flow = extract_solution(model, s.x, assignment);
    return s;
  };

  const ConicProgram relaxed = relax_binaries(model);
  if (m == 0) {
    const SocpSolution s = polish({});
    result.relaxation_objective = s.objective;
    result.trace.push_back({1, 0.0, 0.0, s.objective});
    result.iterations = 1;
    result.converged = true;
    return result;
  }

  const SocpSolution root = solve(relaxed, params.socp);
  if (root.status == SolveStatus::infeasible || root.status == SolveStatus::unbounded) {
    result.status = root.status;
    return result;
  }
  result.relaxation_objective = root.objective;

  Vector y = gather(root.x, ys).cwiseMax(0.0).cwiseMin(1.0);
  Vector lambda = Vector::Zero(m);
  Vector u = Vector::Zero(m);
  for (int k = 0; k < params.max_outer_iters; ++k) {
    const Qubo step = build_step_qubo(y, lambda, params.rho);
    const QuboSolution qs = solve_qubo(step, params.qubo_backend, params, step_seed(params.seed, k));
    u = qs.bits.cast<double>();

    const Vector target = u + lambda / params.rho;
    const SocpSolution cs = solve(penalized(relaxed, ys, target, params.rho), params.socp);
    AdmmIteration row;
    row.iteration = k + 1;
    if (cs.status == SolveStatus::infeasible || cs.status == SolveStatus::unbounded) {
      row.primal_residual = row.dual_residual = row.objective = std::numeric_limits<double>::quiet_NaN();
      result.trace.push_back(row);
      result.iterations = k + 1;
      continue;
    }
    const Vector y_next = gather(cs.x, ys).cwiseMax(0.0).cwiseMin(1.0);
    row.dual_residual = params.rho * (y_next - y).norm();
    y = y_next;
    lambda += params.rho * (u - y);
    row.primal_residual = (u - y).cwiseAbs().maxCoeff();
    row.objective = base_objective(relaxed, cs.x);
    result.trace.push_back(row);
    result.iterations = k + 1;
    if (row.primal_residual <= params.eps_residual) {
      result.converged = true;
      break;
    }
  }

  for (Index i = 0; i < m; ++i) result.rounded[ids[static_cast<std::size_t>(i)]] = y(i) > params.threshold;
  SwitchAssignment chosen = result.rounded;
  if (!is_spanning_tree(model.network, effective_status(model.network, model.scenario, chosen))) {
    const std::vector<SwitchAssignment> radial = enumerate_radial_configs(model.network, model.scenario);
    if (radial.empty()) {
      result.status = SolveStatus::infeasible;
      result.assignment = chosen;
      return result;
    }
    chosen = nearest_radial(radial, chosen, ids, y);
    result.used_fallback = true;
  }
  polish(chosen);
  return result;
}

std::string trace_to_csv(const std::vector<AdmmIteration>& trace) {
  std::ostringstream out;
  out << "iteration,primal_residual,dual_residual,objective\n" << std::setprecision(17);
  for (const AdmmIteration& r : trace)
    out << r.iteration << ',' << r.primal_residual << ',' << r.dual_residual << ',' << r.objective << '\n';
  return out.str();
}

}  // namespace reconf
