#include <cmath>
#include <random>
#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "hybridswap/channel.hpp"
#include "hybridswap/error.hpp"
#include "hybridswap/metrics.hpp"
#include "hybridswap/states.hpp"

using namespace hybridswap;
using testutil::kron;

namespace {

MultiModeState qubits(const Matrix& rho) { return MultiModeState({{"A", 2}, {"B", 2}}, rho); }

Matrix bell() {
  Vector v = (kron(fock_ket(2, 0), fock_ket(2, 1)) + kron(fock_ket(2, 1), fock_ket(2, 0))) / std::sqrt(2.0);
  return v * v.adjoint();
}

}  // namespace

TEST_CASE("negativity oracles") {
  CHECK(std::abs(negativity(qubits(bell()), {"A"}) - 0.5) < 1e-10);
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    const MultiModeState a({{"A", 3}}, testutil::random_density(3, rng));
    const MultiModeState b({{"B", 4}}, testutil::random_density(4, rng));
    CHECK(negativity(tensor(a, b), {"A"}) < 1e-10);
  }
  for (double p : {0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
    const Matrix w = p * bell() + (1 - p) * Matrix::Identity(4, 4) / 4.0;
    CHECK(negativity(qubits(w), {"A"}) == doctest::Approx(std::max(0.0, (3 * p - 1) / 4)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(negativity(qubits(bell()), {}), Error);
  CHECK_THROWS_AS(negativity(qubits(bell()), {"A", "B"}), Error);
}

TEST_CASE("negativity is invariant under local unitaries") {
  std::mt19937_64 rng(8);
  const auto s = experimental_input_hybrid(InputModelParams::measured_hybrid(), 0.9, 3, 12);
  const double n0 = negativity(s, {"C"});
  for (int rep = 0; rep < 5; ++rep) {
    const auto u1 = testutil::random_unitary(3, rng);
    const auto u2 = testutil::random_unitary(12, rng);
    const auto rotated = apply_operator(apply_operator(s, {"C"}, u1), {"D"}, u2);
    CHECK(negativity(rotated, {"C"}) == doctest::Approx(n0).epsilon(1e-9));
    CHECK(negativity(rotated, {"D"}) == doctest::Approx(n0).epsilon(1e-9));
  }
}

TEST_CASE("log negativity") {
  CHECK(log_negativity_from(0.5) == 1.0);
  CHECK(log_negativity_from(0.0) == 0.0);
  const auto hy = experimental_input_hybrid(InputModelParams::measured_hybrid());
  CHECK(log_negativity(hy, {"C"}) == log_negativity_from(negativity(hy, {"C"})));
  CHECK(log_negativity(hy, {"C"}) == doctest::Approx(std::log2(2 * negativity(hy, {"C"}) + 1)));
  CHECK(std::abs(log_negativity_from(0.223) - 0.532) < 1e-3);
  CHECK(std::abs(log_negativity(hy, {"C"}) - 0.533) < 0.02);
}

TEST_CASE("fidelity") {
  std::mt19937_64 rng(12);
  const MultiModeState a({{"A", 3}}, testutil::random_density(3, rng));
  const MultiModeState b({{"A", 3}}, testutil::random_density(3, rng));
  CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-9));
  CHECK(fidelity(a, b) < 1.0);
  const auto zero = MultiModeState::from_ket({{"A", 2}}, fock_ket(2, 0));
  const auto one = MultiModeState::from_ket({{"A", 2}}, fock_ket(2, 1));
  const auto plus = MultiModeState::from_ket({{"A", 2}}, (fock_ket(2, 0) + fock_ket(2, 1)) / std::sqrt(2.0));
  CHECK(fidelity(zero, one) < 1e-12);
  CHECK(fidelity(zero, plus) == doctest::Approx(0.5).epsilon(1e-10));
  // Pure against mixed: <psi|rho|psi>.
  const Vector psi = (fock_ket(3, 0) + Complex(0, 1) * fock_ket(3, 2)) / std::sqrt(2.0);
  const auto pure = MultiModeState::from_ket({{"A", 3}}, psi);
  CHECK(fidelity(pure, a) == doctest::Approx((psi.adjoint() * a.matrix() * psi)(0, 0).real()).epsilon(1e-8));
  CHECK_THROWS_AS(fidelity(zero, a), Error);
}

TEST_CASE("purity") {
  CHECK(purity(hybrid_entangled()) == doctest::Approx(1.0).epsilon(1e-12));
  for (int d : {2, 3, 7}) {
    const MultiModeState mixed({{"A", d}}, Matrix::Identity(d, d) / double(d));
    CHECK(purity(mixed) == doctest::Approx(1.0 / d).epsilon(1e-12));
  }
  // Loss first mixes, then drives everything to the vacuum, so purity is only
  // monotone on the first stretch; the grid stays there.
  const auto cat = MultiModeState::from_ket({{"A", 12}}, cat_ket({0.9, Parity::odd, 12}));
  double prev = purity(cat);
  for (double eta : {0.97, 0.93, 0.9, 0.85, 0.8}) {
    const double p = purity(apply_loss(cat, "A", eta));
    CHECK(p <= prev + 1e-12);
    prev = p;
  }
  CHECK(purity(apply_loss(cat, "A", 1e-9)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("extrapolation recovers exact data") {
  std::vector<PartitionValue> values;
  for (std::size_t n : {500u, 1000u, 2000u, 4000u, 8000u})
    for (int rep = 0; rep < 6; ++rep) values.push_back({n, 0.3 + 2.0 / std::sqrt(double(n))});
  const auto fit = extrapolate_log_negativity(values);
  CHECK(std::abs(fit.e_infinity - 0.3) < 1e-9);
  CHECK(std::abs(fit.c - 2.0) < 1e-9);
  CHECK(fit.table.size() == 5);
  CHECK(fit.table.front().size == 500);
  CHECK(fit.table.front().count == 6);

  // Order of the input does not matter.
  std::mt19937_64 rng(1);
  std::vector<PartitionValue> noisy;
  std::normal_distribution<double> g(0.0, 0.01);
  for (std::size_t n : {300u, 600u, 1200u, 2400u})
    for (int rep = 0; rep < 6; ++rep) noisy.push_back({n, 0.25 + 1.0 / std::sqrt(double(n)) + g(rng)});
  const auto f1 = extrapolate_log_negativity(noisy);
  std::shuffle(noisy.begin(), noisy.end(), rng);
  const auto f2 = extrapolate_log_negativity(noisy);
  CHECK(f1.e_infinity == doctest::Approx(f2.e_infinity).epsilon(1e-12));
  CHECK(f1.c == doctest::Approx(f2.c).epsilon(1e-12));
  CHECK(f1.e_infinity_stderr > 0.0);

  std::vector<PartitionValue> two = {{100, 0.5}, {200, 0.4}, {100, 0.6}};
  CHECK_THROWS_AS(extrapolate_log_negativity(two), Error);
}

TEST_CASE("extrapolation standard errors match the textbook formulas") {
  // Independent check through the normal equations.
  std::vector<PartitionValue> v = {{100, 0.50}, {200, 0.43}, {400, 0.41}, {800, 0.36}};
  const auto fit = extrapolate_log_negativity(v);
  Eigen::MatrixXd x(4, 2);
  Eigen::VectorXd y(4);
  for (int i = 0; i < 4; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = 1.0 / std::sqrt(double(v[i].size));
    y(i) = v[i].value;
  }
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd beta = xtx.ldlt().solve(x.transpose() * y);
  const double s2 = (y - x * beta).squaredNorm() / 2.0;
  const Eigen::MatrixXd cov = s2 * xtx.inverse();
  CHECK(fit.e_infinity == doctest::Approx(beta(0)).epsilon(1e-10));
  CHECK(fit.c == doctest::Approx(beta(1)).epsilon(1e-10));
  CHECK(fit.e_infinity_stderr == doctest::Approx(std::sqrt(cov(0, 0))).epsilon(1e-8));
  CHECK(fit.c_stderr == doctest::Approx(std::sqrt(cov(1, 1))).epsilon(1e-8));
}
