#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace oracle {

using namespace reconf;

std::vector<AnalyticCase> analytic_socps() {
  std::vector<AnalyticCase> cases;
  {
    ProgramBuilder b;
    const Index t = b.add_variable(1.0), u = b.add_variable();
    b.add_equality({{u, 1.0}}, 1.0);
    b.add_soc(t, {u});
    cases.push_back({"t >= |u|, u = 1", b.build(), 1.0});
  }
  {
    ProgramBuilder b;
    b.add_boxed(0.0, 2.0, -1.0);
    cases.push_back({"min -x on [0, 2]", b.build(), -2.0});
  }
  {
    ProgramBuilder b;
    const Index p = b.add_variable(1.0), q = b.add_variable(1.0), u = b.add_variable();
    b.add_equality({{u, 1.0}}, 2.0);
    b.add_equality({{q, 1.0}, {p, -2.0}}, 0.0);
    b.add_rotated(p, q, {u});
    cases.push_back({"rotated p + q, q = 2p, u = 2", b.build(), 3.0});
  }
  {
    // distance from (1, 2) to the line x + y = 0
    ProgramBuilder b;
    const Index t = b.add_variable(1.0), x = b.add_variable(), y = b.add_variable();
    const Index dx = b.add_variable(), dy = b.add_variable();
    b.add_equality({{x, 1.0}, {y, 1.0}}, 0.0);
    b.add_equality({{dx, 1.0}, {x, -1.0}}, -1.0);
    b.add_equality({{dy, 1.0}, {y, -1.0}}, -2.0);
    b.add_soc(t, {dx, dy});
    cases.push_back({"point-to-line distance", b.build(), 3.0 / std::sqrt(2.0)});
  }
  {
    ProgramBuilder b;
    const Index t = b.add_boxed(1.0, 1.0), x = b.add_variable(-1.0), y = b.add_variable(-1.0);
    b.add_soc(t, {x, y});
    cases.push_back({"max x + y on the unit disc", b.build(), -std::sqrt(2.0)});
  }
  {
    ProgramBuilder b;
    const Index x = b.add_nonneg(1.0), y = b.add_boxed(0.0, 2.0), u = b.add_boxed(1.0, 1.0);
    b.add_rotated(x, y, {u});
    cases.push_back({"min x with 2xy >= 1, y <= 2", b.build(), 0.25});
  }
  {
    ProgramBuilder b;
    const Index t = b.add_variable(1.0), half = b.add_boxed(0.5, 0.5), x1 = b.add_variable(), x2 = b.add_variable();
    b.add_equality({{x1, 1.0}, {x2, 1.0}}, 2.0);
    b.add_rotated(t, half, {x1, x2});
    cases.push_back({"least squares epigraph", b.build(), 2.0});
  }
  {
    ProgramBuilder b;
    const Index x = b.add_nonneg(1.0), y = b.add_nonneg(2.0);
    b.add_equality({{x, 1.0}, {y, 1.0}}, 1.0);
    cases.push_back({"lp on the simplex", b.build(), 1.0});
  }
  {
    ProgramBuilder b;
    const Index t = b.add_boxed(3.0, 3.0), x1 = b.add_variable(), x2 = b.add_variable(), x3 = b.add_variable(-1.0);
    b.add_equality({{x1, 1.0}}, 1.0);
    b.add_equality({{x2, 1.0}}, 2.0);
    b.add_soc(t, {x1, x2, x3});
    cases.push_back({"ball of radius 3, fixed x1 x2", b.build(), -2.0});
  }
  {
    ProgramBuilder b;
    const Index t = b.add_variable(1.0), x = b.add_boxed(1.0, 5.0), y = b.add_boxed(-3.0, -2.0);
    b.add_soc(t, {x, y});
    cases.push_back({"norm over a box", b.build(), std::sqrt(5.0)});
  }
  return cases;
}

bool TinySocp::feasible(const Eigen::VectorXd& z) const {
  if ((z.array() < lo.array()).any() || (z.array() > hi.array()).any()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if ((a[k] * z + b[k]).norm() > g[k].dot(z) + h[k]) return false;
  return true;
}

ConicProgram TinySocp::program() const {
  ProgramBuilder pb;
  std::vector<Index> z;
  for (int i = 0; i < d; ++i) z.push_back(pb.add_boxed(lo(i), hi(i), c(i)));
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Index t = pb.add_variable();
    std::vector<std::pair<Index, double>> row = {{t, 1.0}};
    for (int i = 0; i < d; ++i) row.emplace_back(z[static_cast<std::size_t>(i)], -g[k](i));
    pb.add_equality(row, h[k]);
    std::vector<Index> tail;
    for (Index r = 0; r < a[k].rows(); ++r) {
      const Index u = pb.add_variable();
      std::vector<std::pair<Index, double>> ur = {{u, 1.0}};
      for (int i = 0; i < d; ++i) ur.emplace_back(z[static_cast<std::size_t>(i)], -a[k](r, i));
      pb.add_equality(ur, b[k](r));
      tail.push_back(u);
    }
    pb.add_soc(t, tail);
  }
  return pb.build();
}

TinySocp random_tiny_socp(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  TinySocp p;
  p.d = d;
  p.c = Eigen::VectorXd::NullaryExpr(d, [&] { return n01(rng); });
  p.lo = Eigen::VectorXd::Constant(d, -2.0);
  p.hi = Eigen::VectorXd::Constant(d, 2.0);
  const Eigen::VectorXd center = Eigen::VectorXd::NullaryExpr(d, [&] { return 0.5 * unif(rng); });
  const int cones = d == 2 ? 2 : 1;
  for (int k = 0; k < cones; ++k) {
    const int rows = 2;
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(rows, d, [&] { return n01(rng); });
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(rows, [&] { return 0.5 * n01(rng); });
    Eigen::VectorXd g = Eigen::VectorXd::NullaryExpr(d, [&] { return 0.3 * n01(rng); });
    // margin 0.5 .. 1.5 at the center keeps the interior nonempty
    const double h = (a * center + b).norm() - g.dot(center) + 0.5 + 0.5 * (unif(rng) + 1.0);
    p.a.push_back(a);
    p.b.push_back(b);
    p.g.push_back(g);
    p.h.push_back(h);
  }
  return p;
}

double grid_minimum(const TinySocp& p, double resolution) {
  // Beam search: every level grids a window around each of a few well
  // separated incumbents, then halves the window. Keeping several incumbents
  // protects against a thin optimal corner that the coarse grid misses.
  const int d = p.d;
  const int points = d == 2 ? 101 : 25;
  const std::size_t beam = 6;
  struct Candidate {
    double value;
    Eigen::VectorXd z;
  };
  std::vector<Eigen::VectorXd> centers = {(p.lo + p.hi) / 2.0};
  Eigen::VectorXd half = (p.hi - p.lo) / 2.0;
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<Candidate> found;
    Eigen::VectorXd step;
    for (const Eigen::VectorXd& center : centers) {
      const Eigen::VectorXd lo = (center - half).cwiseMax(p.lo), hi = (center + half).cwiseMin(p.hi);
      step = (hi - lo) / (points - 1);
      std::vector<int> idx(static_cast<std::size_t>(d), 0);
      for (;;) {
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z(i) = lo(i) + step(i) * idx[static_cast<std::size_t>(i)];
        if (p.feasible(z)) found.push_back({p.c.dot(z), z});
        int i = 0;
        while (i < d && ++idx[static_cast<std::size_t>(i)] == points) idx[static_cast<std::size_t>(i++)] = 0;
        if (i == d) break;
      }
    }
    if (found.empty()) break;
    std::sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    best = std::min(best, found.front().value);
    half /= 2.0;
    if (2.0 * half.maxCoeff() / (points - 1) < resolution) break;
    centers.clear();
    for (const Candidate& c : found) {
      bool separated = true;
      for (const Eigen::VectorXd& z : centers)
        if (((c.z - z).array().abs() <= half.array()).all()) separated = false;
      if (separated) centers.push_back(c.z);
      if (centers.size() == beam) break;
    }
  }
  return best;
}

double two_bus_grid_power(double pd, double qd, double r, double x) {
  double isq = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double p = pd + r * isq, q = qd + x * isq;
    isq = p * p + q * q;  // sending-end voltage is 1, so I^2 = |S|^2
  }
  return pd + r * isq;
}

Network two_bus(double pd, double qd, double r, double x) {
  std::vector<Bus> buses = {{1, 0.0, 0.0, 0.9, 1.05, true}, {2, pd, qd, 0.9, 1.05, false}};
  std::vector<Line> lines = {{1, 1, 2, r, x, false, false}};
  return Network(buses, lines, 1.0, 1.0);
}

std::string data_path(const std::string& relative) { return std::string(RECONF_SOURCE_DIR) + "/" + relative; }

}  // namespace oracle
