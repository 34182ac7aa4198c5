#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "random.hpp"
#include "reconf/qubo.hpp"

namespace reconf {

namespace {

using Point = Eigen::VectorXd;

struct Minimum {
  Point x;
  double f = 0.0;
  int evaluations = 0;
};

// Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
Minimum nelder_mead(const std::function<double(const Point&)>& f, const Point& x0, const Point& step, int budget) {
  const Eigen::Index d = x0.size();
  std::vector<Point> simplex(static_cast<std::size_t>(d + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(d + 1));
  int evals = 0;
  auto eval = [&](const Point& x) {
    ++evals;
    return f(x);
  };
  values[0] = eval(x0);
  for (Eigen::Index i = 0; i < d && evals < budget; ++i) {
    simplex[static_cast<std::size_t>(i + 1)](i) += step(i);
    values[static_cast<std::size_t>(i + 1)] = eval(simplex[static_cast<std::size_t>(i + 1)]);
  }
  const std::size_t filled = static_cast<std::size_t>(std::min<Eigen::Index>(d + 1, evals));
  std::vector<std::size_t> order(static_cast<std::size_t>(d + 1));
  while (filled == simplex.size() && evals < budget) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (values[worst] - values[best] <= 1e-12 * (1.0 + std::abs(values[best]))) break;
    Point centroid = Point::Zero(d);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(d);
    const Point reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      if (evals >= budget) {
        simplex[worst] = reflected, values[worst] = fr;
        break;
      }
      const Point expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded, values[worst] = fe;
      } else {
        simplex[worst] = reflected, values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected, values[worst] = fr;
    } else {
      const bool outside = fr < values[worst];
      const Point contracted =
          outside ? Point(centroid + 0.5 * (reflected - centroid)) : Point(centroid + 0.5 * (simplex[worst] - centroid));
      if (evals >= budget) break;
      const double fc = eval(contracted);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted, values[worst] = fc;
      } else {
        if (outside) simplex[worst] = reflected, values[worst] = fr;
        for (std::size_t i = 0; i < simplex.size() && evals < budget; ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = eval(simplex[i]);
        }
      }
    }
  }
  const std::size_t n_valid = std::min(simplex.size(), static_cast<std::size_t>(std::max(evals, 1)));
  std::size_t arg = 0;
  for (std::size_t i = 1; i < n_valid; ++i)
    if (values[i] < values[arg]) arg = i;
  return {simplex[arg], values[arg], evals};
}

int qubits_of(Eigen::Index dim) {
  if (dim < 2 || (dim & (dim - 1)) != 0) throw std::invalid_argument("diagonal length must be a power of two >= 2");
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  return n;
}

}  // namespace

QaoaParams QaoaParams::with_depth(int p) {
  if (p < 1) throw std::invalid_argument("qaoa depth must be >= 1");
  QaoaParams params;
  params.p = p;
  params.gamma.resize(static_cast<std::size_t>(p));
  params.beta.resize(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    params.gamma[static_cast<std::size_t>(k)] = 0.9 * (k + 1) / p;
    params.beta[static_cast<std::size_t>(k)] = 0.6 * (1.0 - static_cast<double>(k) / p);
  }
  return params;
}

void QaoaParams::validate() const {
  if (p < 1) throw std::invalid_argument("qaoa depth must be >= 1");
  if (gamma.size() != static_cast<std::size_t>(p) || beta.size() != static_cast<std::size_t>(p))
    throw std::invalid_argument("qaoa angle vectors must have length p");
  if (shots < 1) throw std::invalid_argument("qaoa shots must be >= 1");
  if (optimizer_budget < 1) throw std::invalid_argument("qaoa optimizer budget must be >= 1");
  if (restarts < 1) throw std::invalid_argument("qaoa restarts must be >= 1");
}

StateVector qaoa_state(const Eigen::VectorXd& diagonal, std::span<const double> gamma, std::span<const double> beta,
                       std::vector<double>* layer_norms) {
  if (gamma.size() != beta.size()) throw std::invalid_argument("gamma and beta must have equal length");
  const int n = qubits_of(diagonal.size());
  const Eigen::Index dim = diagonal.size();
  const double lo = diagonal.minCoeff();
  const double range = diagonal.maxCoeff() - lo;
  const Eigen::VectorXd cost = range > 0 ? Eigen::VectorXd((diagonal.array() - lo) / range) : Eigen::VectorXd::Zero(dim);

  StateVector psi = StateVector::Constant(dim, std::complex<double>(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
  const std::complex<double> i_unit(0.0, 1.0);
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    for (Eigen::Index b = 0; b < dim; ++b) psi(b) *= std::exp(-i_unit * (gamma[k] * cost(b)));
    const double c = std::cos(beta[k]);
    const std::complex<double> s = -i_unit * std::sin(beta[k]);
    for (int q = 0; q < n; ++q) {
      const Eigen::Index stride = Eigen::Index{1} << q;
      for (Eigen::Index b = 0; b < dim; ++b) {
        if (b & stride) continue;
        const std::complex<double> a0 = psi(b), a1 = psi(b | stride);
        psi(b) = c * a0 + s * a1;
        psi(b | stride) = s * a0 + c * a1;
      }
    }
    if (layer_norms) layer_norms->push_back(psi.norm());
  }
  return psi;
}

double qaoa_expectation(const Eigen::VectorXd& diagonal, const StateVector& state) {
  return state.cwiseAbs2().dot(diagonal);
}

QuboSolution solve_qaoa(const Qubo& q, const QaoaParams& params) {
  params.validate();
  const Eigen::VectorXd diag = build_cost_hamiltonian(q);
  const int p = params.p;
  std::mt19937_64 rng(params.seed);

  auto objective = [&](const Point& angles) {
    const std::span<const double> all(angles.data(), static_cast<std::size_t>(2 * p));
    return qaoa_expectation(diag, qaoa_state(diag, all.first(static_cast<std::size_t>(p)), all.last(static_cast<std::size_t>(p))));
  };

  QuboSolution sol;
  sol.method = QuboMethod::qaoa;
  Point best_angles(2 * p);
  double best_value = std::numeric_limits<double>::infinity();
  int remaining = params.optimizer_budget;
  Point step(2 * p);
  step.head(p).setConstant(0.25 * std::numbers::pi);
  step.tail(p).setConstant(0.125 * std::numbers::pi);
  for (int r = 0; r < params.restarts && remaining > 0; ++r) {
    Point start(2 * p);
    if (r == 0) {
      for (int k = 0; k < p; ++k) {
        start(k) = params.gamma[static_cast<std::size_t>(k)];
        start(p + k) = params.beta[static_cast<std::size_t>(k)];
      }
    } else {
      for (int k = 0; k < p; ++k) start(k) = detail::uniform(rng, 0.0, std::numbers::pi);
      for (int k = 0; k < p; ++k) start(p + k) = detail::uniform(rng, 0.0, 0.5 * std::numbers::pi);
    }
    const int share = std::max(1, remaining / (params.restarts - r));
    const Minimum m = nelder_mead(objective, start, step, share);
    remaining -= m.evaluations;
    if (m.f < best_value) {
      best_value = m.f;
      best_angles = m.x;
    }
    sol.best_trace.push_back(best_value);
  }
  sol.gamma.assign(best_angles.data(), best_angles.data() + p);
  sol.beta.assign(best_angles.data() + p, best_angles.data() + 2 * p);
  sol.expectation = best_value;

  const StateVector psi = qaoa_state(diag, sol.gamma, sol.beta);
  const Eigen::VectorXd prob = psi.cwiseAbs2();
  std::vector<double> cumulative(static_cast<std::size_t>(prob.size()));
  double acc = 0.0;
  for (Eigen::Index b = 0; b < prob.size(); ++b) cumulative[static_cast<std::size_t>(b)] = acc += prob(b);
  Eigen::Index chosen = -1;
  for (int s = 0; s < params.shots; ++s) {
    const double u = detail::uniform01(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const Eigen::Index b = it - cumulative.begin();
    if (chosen < 0 || diag(b) < diag(chosen) || (diag(b) == diag(chosen) && b < chosen)) chosen = b;
  }
  sol.bits = bits_of_index(static_cast<std::uint64_t>(chosen), q.size());
  sol.energy = energy(q, sol.bits);
  sol.samples = static_cast<std::uint64_t>(params.shots);
  return sol;
}

}  // namespace reconf
