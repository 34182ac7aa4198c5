#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "reconf/conic_program.hpp"
#include "reconf/network.hpp"

namespace oracle {

struct AnalyticCase {
  std::string name;
  reconf::ConicProgram program;
  double optimum;
};

/// Hand-built programs with closed-form optimal values.
std::vector<AnalyticCase> analytic_socps();

/// min c'z over a box in R^d intersected with cones ||A_k z + b_k|| <= g_k'z + h_k,
/// each strictly satisfied at a known interior point.
struct TinySocp {
  int d = 2;
  Eigen::VectorXd c;
  Eigen::VectorXd lo, hi;
  std::vector<Eigen::MatrixXd> a;
  std::vector<Eigen::VectorXd> b;
  std::vector<Eigen::VectorXd> g;
  std::vector<double> h;

  bool feasible(const Eigen::VectorXd& z) const;
  reconf::ConicProgram program() const;  // z occupies the first d variables
};

TinySocp random_tiny_socp(std::mt19937_64& rng, int d);

/// Best feasible grid value, refined around several incumbents with a
/// halving window until the spacing is below `resolution`.
double grid_minimum(const TinySocp& p, double resolution = 1e-7);

/// Fixed-point iteration of the 2-bus DistFlow equations with v1 = 1:
/// returns the grid real power injection.
double two_bus_grid_power(double pd, double qd, double r, double x);

reconf::Network two_bus(double pd = 0.1, double qd = 0.05, double r = 0.01, double x = 0.01);

std::string data_path(const std::string& relative);

}  // namespace oracle
