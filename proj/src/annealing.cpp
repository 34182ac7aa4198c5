#include <cmath>
#include <random>

#include "random.hpp"
#include "reconf/qubo.hpp"

namespace reconf {

namespace {

struct Walker {
  const Qubo& q;
  Bits x;
  Eigen::VectorXd coupling;  // sum_{j != i} Q_ij x_j
  double e = 0.0;

  Walker(const Qubo& qubo, Bits start) : q(qubo), x(std::move(start)) {
    const Eigen::VectorXd xd = x.cast<double>();
    coupling = q.quad * xd - q.quad.diagonal().cwiseProduct(xd);
    e = energy(q, x);
  }

  double delta(int i) const { return (x(i) ? -1.0 : 1.0) * (q.linear(i) + q.quad(i, i) + 2.0 * coupling(i)); }

  void flip(int i, double d) {
    const double sign = x(i) ? -1.0 : 1.0;
    x(i) ^= 1;
    e += d;
    for (int j = 0; j < q.size(); ++j)
      if (j != i) coupling(j) += sign * q.quad(j, i);
  }

  void descend() {
    for (bool improved = true; improved;) {
      improved = false;
      for (int i = 0; i < q.size(); ++i) {
        const double d = delta(i);
        if (d < 0) {
          flip(i, d);
          improved = true;
        }
      }
    }
  }
};

double flip_scale(const Qubo& q) {
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i)
    s = std::max(s, std::abs(q.linear(i) + q.quad(i, i)) + 2.0 * (q.quad.row(i).cwiseAbs().sum() - std::abs(q.quad(i, i))));
  return s > 0 ? s : 1.0;
}

bool better(double e, const Bits& bits, double best, const Bits& best_bits) {
  if (e != best) return e < best;
  return index_of_bits(bits) < index_of_bits(best_bits);
}

}  // namespace

QuboSolution solve_sa(const Qubo& q, const AnnealSchedule& schedule, int restarts, std::uint64_t seed) {
  if (q.size() < 1) throw std::invalid_argument("qubo needs at least one variable");
  if (!(schedule.t_end > 0) || !(schedule.t_start > schedule.t_end) || schedule.sweeps < 1)
    throw std::invalid_argument("annealing schedule needs t_start > t_end > 0 and sweeps >= 1");
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  const int n = q.size();
  const double scale = flip_scale(q);
  const double t0 = schedule.t_start * scale;
  const double t1 = schedule.t_end * scale;
  const double cool = schedule.sweeps > 1 ? std::pow(t1 / t0, 1.0 / (schedule.sweeps - 1)) : 1.0;

  std::mt19937_64 rng(seed);
  QuboSolution sol;
  sol.method = QuboMethod::sa;
  sol.bits = Bits::Zero(n);
  sol.energy = energy(q, sol.bits);
  for (int r = 0; r < restarts; ++r) {
    Bits start(n);
    for (int i = 0; i < n; ++i) start(i) = detail::uniform01(rng) < 0.5 ? 1 : 0;
    Walker w(q, start);
    Bits run_bits = w.x;
    double run_best = w.e;
    double t = schedule.sweeps > 1 ? t0 : t1;
    for (int sweep = 0; sweep < schedule.sweeps; ++sweep, t *= cool) {
      for (int i = 0; i < n; ++i) {
        const double d = w.delta(i);
        if (d <= 0 || detail::uniform01(rng) < std::exp(-d / t)) w.flip(i, d);
        if (w.e < run_best) {
          run_best = w.e;
          run_bits = w.x;
        }
      }
    }
    Walker polish(q, run_bits);
    polish.descend();
    const double e = energy(q, polish.x);
    if (better(e, polish.x, sol.energy, sol.bits)) {
      sol.energy = e;
      sol.bits = polish.x;
    }
    sol.best_trace.push_back(sol.energy);
  }
  sol.samples = static_cast<std::uint64_t>(restarts) * static_cast<std::uint64_t>(schedule.sweeps) *
                static_cast<std::uint64_t>(n);
  return sol;
}

}  // namespace reconf
