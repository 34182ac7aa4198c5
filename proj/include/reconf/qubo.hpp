#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace reconf {

/// Binary decision vector; entry i is variable i.
using Bits = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

/// minimize x'Qx + c'x + d over x in {0,1}^n, with Q symmetric.
template <typename Scalar>
struct BasicQubo {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix quad;
  Vec linear;
  Scalar offset = Scalar(0);

  int size() const { return static_cast<int>(linear.size()); }
};

using Qubo = BasicQubo<double>;

/// Symmetrizes quad as (Q + Q')/2. Throws std::invalid_argument on shape
/// mismatch or n < 1.
template <typename Scalar>
BasicQubo<Scalar> make_qubo(const typename BasicQubo<Scalar>::Matrix& quad,
                            const typename BasicQubo<Scalar>::Vec& linear, Scalar offset = Scalar(0)) {
  if (linear.size() < 1) throw std::invalid_argument("qubo needs at least one variable");
  if (quad.rows() != linear.size() || quad.cols() != linear.size())
    throw std::invalid_argument("qubo quad must be n x n with n = |linear|");
  BasicQubo<Scalar> q;
  q.quad = (quad + quad.transpose()) / Scalar(2);
  q.linear = linear;
  q.offset = offset;
  return q;
}

template <typename Scalar>
BasicQubo<Scalar> make_qubo(int n) {
  return make_qubo<Scalar>(BasicQubo<Scalar>::Matrix::Zero(n, n), BasicQubo<Scalar>::Vec::Zero(n));
}

template <typename Scalar, typename Derived>
Scalar energy(const BasicQubo<Scalar>& q, const Eigen::MatrixBase<Derived>& bits) {
  if (bits.size() != q.size()) throw std::invalid_argument("bit vector length does not match qubo size");
  const auto x = bits.template cast<Scalar>().eval();
  return x.dot(q.quad * x) + q.linear.dot(x) + q.offset;
}

/// Bits of a basis index, little-endian: variable i is bit i of the index.
Bits bits_of_index(std::uint64_t index, int n);
std::uint64_t index_of_bits(const Bits& bits);
std::string to_string(const Bits& bits);  // "0110", variable 0 first

enum class QuboMethod { exhaustive, sa, qaoa };

std::string to_string(QuboMethod method);
QuboMethod parse_qubo_method(const std::string& text);

struct QuboSolution {
  Bits bits;
  double energy = 0.0;
  QuboMethod method = QuboMethod::exhaustive;
  std::uint64_t samples = 0;
  /// Best value after each restart: energy for sa, expectation for qaoa;
  /// a single entry for exhaustive.
  std::vector<double> best_trace;
  /// Optimized angles and their exact expectation (qaoa only).
  std::vector<double> gamma;
  std::vector<double> beta;
  double expectation = 0.0;
};

constexpr int kMaxExhaustiveVars = 24;
constexpr int kMaxStatevectorQubits = 20;

/// Global minimum; among equal energies the lowest unsigned index wins.
QuboSolution solve_exhaustive(const Qubo& q);

/// Highest-energy bitstring with the same tie rule.
QuboSolution solve_exhaustive_max(const Qubo& q);

/// Geometric cooling from t_start to t_end over `sweeps` full sweeps. Both
/// temperatures are multiplied by the largest single-flip energy change bound
/// of the instance, so the defaults are scale-free.
struct AnnealSchedule {
  double t_start = 2.0;
  double t_end = 1e-3;
  int sweeps = 400;
};

QuboSolution solve_sa(const Qubo& q, const AnnealSchedule& schedule = {}, int restarts = 10, std::uint64_t seed = 0);

/// Diagonal of the cost operator: entry b is energy(q, bits_of_index(b, n)).
Eigen::VectorXd build_cost_hamiltonian(const Qubo& q);

struct QaoaParams {
  int p = 3;
  /// Starting angles of the first optimizer run; later restarts draw gamma
  /// from [0, pi) and beta from [0, pi/2).
  std::vector<double> gamma = {0.3, 0.6, 0.9};
  std::vector<double> beta = {0.6, 0.4, 0.2};
  int shots = 1024;
  /// Total expectation evaluations across all restarts.
  int optimizer_budget = 400;
  int restarts = 5;
  std::uint64_t seed = 0;

  /// Linear-ramp starting angles for depth p.
  static QaoaParams with_depth(int p);
  void validate() const;
};

using StateVector = Eigen::VectorXcd;

/// p-layer ansatz applied to the uniform superposition. The cost diagonal is
/// affinely rescaled to [0, 1] before the phase step, so gamma is measured in
/// units of the cost range. When layer_norms is given it receives the state
/// norm after every layer.
StateVector qaoa_state(const Eigen::VectorXd& diagonal, std::span<const double> gamma, std::span<const double> beta,
                       std::vector<double>* layer_norms = nullptr);

/// <psi|C|psi> with the unscaled diagonal.
double qaoa_expectation(const Eigen::VectorXd& diagonal, const StateVector& state);

QuboSolution solve_qaoa(const Qubo& q, const QaoaParams& params = {});

/// (E_worst - E(bits)) / (E_worst - E_best): 1 on an optimum, 0 on a worst
/// bitstring, 1 when every bitstring has the same energy.
double approximation_ratio(const Qubo& q, const Bits& bits);

/// {"n": .., "quad": [row-major], "linear": [..], "offset": ..}
std::string qubo_to_json(const Qubo& q);
Qubo qubo_from_json(const std::string& text);

}  // namespace reconf
