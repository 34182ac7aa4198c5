#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "reconf/qubo.hpp"

using namespace reconf;

namespace {

Qubo random_qubo(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd quad(n, n);
  Eigen::VectorXd lin(n);
  for (int i = 0; i < n; ++i) {
    lin(i) = g(rng);
    for (int j = 0; j < n; ++j) quad(i, j) = g(rng);
  }
  return make_qubo<double>(quad, lin, g(rng));
}

double summed_energy(const Qubo& q, const Bits& bits) {
  double e = q.offset;
  for (int i = 0; i < q.size(); ++i) {
    if (!bits(i)) continue;
    e += q.linear(i);
    for (int j = 0; j < q.size(); ++j)
      if (bits(j)) e += q.quad(i, j);
  }
  return e;
}

Qubo pair_instance() {
  Eigen::MatrixXd quad(2, 2);
  quad << 0, -2, -2, 0;
  return make_qubo<double>(quad, Eigen::Vector2d(1, 1));
}

}  // namespace

TEST_CASE("energy") {
  Qubo one = make_qubo<double>(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  CHECK(energy(one, Bits::Zero(1)) == 0.0);
  CHECK(energy(pair_instance(), Bits::Ones(2)) == -2.0);
  std::mt19937_64 rng(7);
  const Qubo q = random_qubo(8, rng);
  for (std::uint64_t b = 0; b < 256; b += 7) {
    const Bits bits = bits_of_index(b, 8);
    CHECK(energy(q, bits) == doctest::Approx(summed_energy(q, bits)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(energy(q, Bits::Zero(3)), std::invalid_argument);
}

TEST_CASE("make_qubo symmetrizes") {
  Eigen::MatrixXd quad(2, 2);
  quad << 1, 4, 0, 2;
  const Qubo q = make_qubo<double>(quad, Eigen::Vector2d::Zero());
  CHECK(q.quad(0, 1) == 2.0);
  CHECK(q.quad(1, 0) == 2.0);
  CHECK_THROWS_AS(make_qubo<double>(quad, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("bit ordering is little-endian") {
  const Bits b = bits_of_index(6, 4);
  CHECK(to_string(b) == "0110");
  CHECK(index_of_bits(b) == 6);
  CHECK(to_string(bits_of_index(1, 3)) == "100");
}

TEST_CASE("solve_exhaustive") {
  const QuboSolution s = solve_exhaustive(pair_instance());
  CHECK(to_string(s.bits) == "11");
  CHECK(s.energy == -2.0);

  const Qubo pos = make_qubo<double>(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Ones(3));
  CHECK(to_string(solve_exhaustive(pos).bits) == "000");

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Qubo q = random_qubo(10, rng);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t arg = 0;
    for (std::uint64_t b = 0; b < 1024; ++b) {
      const double e = summed_energy(q, bits_of_index(b, 10));
      if (e < best) best = e, arg = b;
    }
    const QuboSolution s = solve_exhaustive(q);
    CHECK(index_of_bits(s.bits) == arg);
    CHECK(s.energy == doctest::Approx(best).epsilon(1e-12));
    CHECK(s.energy == energy(q, s.bits));
  }
  CHECK_THROWS_AS(solve_exhaustive(make_qubo<double>(kMaxExhaustiveVars + 1)), std::invalid_argument);
}

TEST_CASE("solve_exhaustive breaks ties toward the lowest index") {
  // every bitstring has energy 0
  CHECK(to_string(solve_exhaustive(make_qubo<double>(4)).bits) == "0000");
  // u = 0 and u = 1 tie
  Qubo q = make_qubo<double>(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 0.0), 0.125);
  CHECK(to_string(solve_exhaustive(q).bits) == "0");
  // bitstrings 01 and 10 tie below everything else: 10 has index 1
  Eigen::MatrixXd quad(2, 2);
  quad << 0, 1, 1, 0;
  q = make_qubo<double>(quad, Eigen::Vector2d(-1, -1));
  CHECK(to_string(solve_exhaustive(q).bits) == "10");
}

TEST_CASE("solve_sa") {
  const Qubo one = make_qubo<double>(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 5.0));
  CHECK(to_string(solve_sa(one).bits) == "0");
  CHECK(to_string(solve_sa(pair_instance()).bits) == "11");

  std::mt19937_64 rng(3);
  const Qubo q = random_qubo(12, rng);
  const QuboSolution a = solve_sa(q, {}, 10, 42);
  const QuboSolution b = solve_sa(q, {}, 10, 42);
  CHECK(a.bits == b.bits);
  CHECK(a.energy == b.energy);
  CHECK(a.energy == energy(q, a.bits));
  CHECK(solve_exhaustive(q).energy <= a.energy);
  CHECK(a.energy <= energy(q, Bits::Zero(12)));
  CHECK(a.best_trace.size() == 10);
  CHECK_THROWS_AS(solve_sa(q, {1e-3, 2.0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(solve_sa(q, {2.0, 1e-3, 0}), std::invalid_argument);
}

TEST_CASE("build_cost_hamiltonian") {
  const Qubo one = make_qubo<double>(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  CHECK(build_cost_hamiltonian(one) == Eigen::Vector2d(0, 1));
  CHECK(build_cost_hamiltonian(pair_instance()) == Eigen::Vector4d(0, 1, 1, -2));
  std::mt19937_64 rng(5);
  const Qubo q = random_qubo(6, rng);
  const Eigen::VectorXd d = build_cost_hamiltonian(q);
  REQUIRE(d.size() == 64);
  for (std::uint64_t b = 0; b < 64; ++b) CHECK(d(b) == doctest::Approx(summed_energy(q, bits_of_index(b, 6))).epsilon(1e-12));
  CHECK_THROWS_AS(build_cost_hamiltonian(make_qubo<double>(kMaxStatevectorQubits + 1)), std::invalid_argument);
}

TEST_CASE("qaoa_state on one qubit matches the closed form") {
  // cost (0, 1): after phase and RX(2 beta), amplitudes are
  // a0 = (cos b - i sin b e^{-i g}) / sqrt2, a1 = (e^{-i g} cos b - i sin b) / sqrt2
  const Eigen::VectorXd diag = Eigen::Vector2d(0, 1);
  const std::complex<double> i(0, 1);
  for (double g : {0.0, 0.4, 1.7, 3.0})
    for (double b : {0.0, 0.3, 1.1}) {
      const double ga[] = {g}, be[] = {b};
      const StateVector psi = qaoa_state(diag, ga, be);
      const std::complex<double> ph = std::exp(-i * g);
      const std::complex<double> a0 = (std::cos(b) - i * std::sin(b) * ph) / std::sqrt(2.0);
      const std::complex<double> a1 = (ph * std::cos(b) - i * std::sin(b)) / std::sqrt(2.0);
      CHECK(std::abs(psi(0) - a0) < 1e-14);
      CHECK(std::abs(psi(1) - a1) < 1e-14);
    }
}

TEST_CASE("qaoa_state properties") {
  std::mt19937_64 rng(9);
  const Qubo q = random_qubo(6, rng);
  const Eigen::VectorXd diag = build_cost_hamiltonian(q);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> g(4), b(4);
    for (auto& v : g) v = angle(rng);
    for (auto& v : b) v = angle(rng);
    std::vector<double> norms;
    const StateVector psi = qaoa_state(diag, g, b, &norms);
    REQUIRE(norms.size() == 4);
    for (double n : norms) CHECK(std::abs(n - 1.0) < 1e-10);
    const double e = qaoa_expectation(diag, psi);
    CHECK(e >= diag.minCoeff() - 1e-12);
    CHECK(e <= diag.maxCoeff() + 1e-12);

    const std::vector<double> zero(4, 0.0);
    const Eigen::VectorXd prob = qaoa_state(diag, g, zero).cwiseAbs2();
    CHECK((prob.array() - 1.0 / 64).abs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("solve_qaoa") {
  const Qubo one = make_qubo<double>(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  QaoaParams p1 = QaoaParams::with_depth(1);
  const QuboSolution s = solve_qaoa(one, p1);
  CHECK(to_string(s.bits) == "0");
  const StateVector psi = qaoa_state(build_cost_hamiltonian(one), s.gamma, s.beta);
  CHECK(std::norm(psi(0)) > 0.5);

  const QuboSolution flat = solve_qaoa(make_qubo<double>(3));
  CHECK(flat.energy == 0.0);

  std::mt19937_64 rng(13);
  const Qubo q = random_qubo(5, rng);
  QaoaParams params;
  params.seed = 4;
  const QuboSolution a = solve_qaoa(q, params);
  const QuboSolution b = solve_qaoa(q, params);
  CHECK(a.bits == b.bits);
  CHECK(a.gamma == b.gamma);
  CHECK(a.energy == energy(q, a.bits));
  CHECK(a.samples == 1024);

  QaoaParams bad;
  bad.gamma.pop_back();
  CHECK_THROWS_AS(solve_qaoa(q, bad), std::invalid_argument);
  CHECK(QaoaParams::with_depth(3).gamma == QaoaParams{}.gamma);
}

TEST_CASE("approximation_ratio") {
  const Qubo q = pair_instance();
  CHECK(approximation_ratio(q, bits_of_index(3, 2)) == 1.0);
  CHECK(approximation_ratio(q, bits_of_index(1, 2)) == 0.0);
  CHECK(approximation_ratio(q, bits_of_index(0, 2)) == doctest::Approx(1.0 / 3.0));
  CHECK(approximation_ratio(make_qubo<double>(2), bits_of_index(2, 2)) == 1.0);
  std::mt19937_64 rng(17);
  const Qubo r = random_qubo(8, rng);
  CHECK(approximation_ratio(r, solve_exhaustive(r).bits) == 1.0);
  CHECK(approximation_ratio(r, solve_exhaustive_max(r).bits) == 0.0);
}

TEST_CASE("qubo json round trip") {
  std::mt19937_64 rng(19);
  const Qubo q = random_qubo(4, rng);
  const Qubo r = qubo_from_json(qubo_to_json(q));
  CHECK(r.quad == q.quad);
  CHECK(r.linear == q.linear);
  CHECK(r.offset == q.offset);
  CHECK_THROWS(qubo_from_json("{\"n\": 2}"));
}
