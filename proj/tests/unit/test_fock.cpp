#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "hybridswap/error.hpp"
#include "hybridswap/fock.hpp"

using namespace hybridswap;
using testutil::kron;
using testutil::max_abs;

namespace {

MultiModeState fock2(int n1, int n2, int d = 3, const char* l1 = "A", const char* l2 = "B") {
  return MultiModeState::from_ket({{l1, d}, {l2, d}}, kron(fock_ket(d, n1), fock_ket(d, n2)));
}

// H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)) with H_n from its own recurrence.
double psi_closed(int n, double x) {
  double h0 = 1.0, h1 = 2.0 * x;
  double h = n == 0 ? h0 : h1;
  for (int k = 1; k < n; ++k) {
    h = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h;
  }
  return h * std::exp(-0.5 * x * x) / std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(M_PI));
}

}  // namespace

TEST_CASE("state construction validates the register") {
  CHECK_THROWS_AS(MultiModeState({{"A", 2}, {"A", 2}}, Matrix::Identity(4, 4) / 4.0), Error);
  CHECK_THROWS_AS(MultiModeState({{"A", 1}}, Matrix::Identity(1, 1)), Error);
  CHECK_THROWS_AS(MultiModeState({{"A", 2}}, Matrix::Identity(3, 3) / 3.0), Error);
  Matrix bad = Matrix::Identity(2, 2) / 2.0;
  bad(0, 1) = 0.3;
  CHECK_THROWS_AS(MultiModeState({{"A", 2}}, bad), Error);
  CHECK_THROWS_AS(MultiModeState({{"A", 2}}, Matrix::Identity(2, 2)), Error);
  CHECK_NOTHROW(MultiModeState({{"A", 2}}, Matrix::Identity(2, 2), NormPolicy::unnormalized));
  try {
    MultiModeState({{"A", 2}, {"A", 2}}, Matrix::Identity(4, 4) / 4.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::label);
  }
}

TEST_CASE("tensor") {
  const auto v = MultiModeState::from_ket({{"A", 2}}, fock_ket(2, 0));
  const auto w = MultiModeState::from_ket({{"B", 2}}, fock_ket(2, 0));
  const auto vw = tensor(v, w);
  CHECK(vw.labels() == std::vector<std::string>{"A", "B"});
  CHECK(vw.trace() == doctest::Approx(1.0));
  CHECK(std::abs(vw.matrix()(0, 0) - 1.0) < 1e-15);
  CHECK_THROWS_AS(tensor(v, v), Error);

  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    const MultiModeState a({{"A", 2}}, 0.7 * testutil::random_density(2, rng), NormPolicy::unnormalized);
    const MultiModeState b({{"B", 2}}, 1.3 * testutil::random_density(2, rng), NormPolicy::unnormalized);
    CHECK(tensor(a, b).trace() == doctest::Approx(a.trace() * b.trace()).epsilon(1e-12));
    // Tr_B(a x b) = a Tr(b)
    const auto reduced = partial_trace(tensor(a, b), {"A"});
    CHECK(max_abs(reduced.matrix() - a.matrix() * b.trace()) < 1e-12);
  }
}

TEST_CASE("beamsplitter single photon and Hong-Ou-Mandel") {
  const auto out = apply_beamsplitter(fock2(1, 0), "A", "B", 0.5);
  const Vector expect = (kron(fock_ket(3, 1), fock_ket(3, 0)) + kron(fock_ket(3, 0), fock_ket(3, 1))) / std::sqrt(2.0);
  CHECK(max_abs(out.matrix() - expect * expect.adjoint()) < 1e-12);

  // a1^dag a2^dag -> (a1' + a2')(a2' - a1')/2 = (a2'^2 - a1'^2)/2
  const auto hom = apply_beamsplitter(fock2(1, 1), "A", "B", 0.5);
  const Vector hom_expect = (kron(fock_ket(3, 0), fock_ket(3, 2)) - kron(fock_ket(3, 2), fock_ket(3, 0))) / std::sqrt(2.0);
  CHECK(max_abs(hom.matrix() - hom_expect * hom_expect.adjoint()) < 1e-12);

  // Amplitude level, including signs, against the mode transformation.
  const Matrix u = beamsplitter_unitary(3, 3, 0.3);
  const double t = std::sqrt(0.3), r = std::sqrt(0.7);
  // |1,0> -> t|1,0> + r|0,1>
  CHECK(std::abs(u(3, 3) - t) < 1e-12);
  CHECK(std::abs(u(1, 3) - r) < 1e-12);
  // |0,1> -> t|0,1> - r|1,0>
  CHECK(std::abs(u(1, 1) - t) < 1e-12);
  CHECK(std::abs(u(3, 1) + r) < 1e-12);
  // |1,1> -> (t a1 + r a2)(t a2 - r a1): coefficient of |2,0> is -t r sqrt2, of |1,1> t^2 - r^2
  CHECK(std::abs(u(6, 4) + t * r * std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(u(4, 4) - (t * t - r * r)) < 1e-12);
  CHECK(std::abs(u(2, 4) - t * r * std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("beamsplitter identity, inverse and errors") {
  std::mt19937_64 rng(11);
  const MultiModeState s({{"A", 3}, {"B", 4}}, testutil::random_density(12, rng));
  CHECK(max_abs(apply_beamsplitter(s, "A", "B", 1.0).matrix() - s.matrix()) < 1e-12);
  for (double t : {0.0, 0.2, 0.5, 0.9}) {
    const auto there = apply_beamsplitter(s, "A", "B", t);
    CHECK(there.trace() == doctest::Approx(1.0).epsilon(1e-10));
    const auto back = apply_beamsplitter(there, "B", "A", t);
    CHECK(max_abs(back.matrix() - s.matrix()) < 1e-9);
  }
  CHECK_THROWS_AS(apply_beamsplitter(s, "A", "Z", 0.5), Error);
  CHECK_THROWS_AS(apply_beamsplitter(s, "A", "B", 1.5), Error);
  CHECK_THROWS_AS(apply_beamsplitter(s, "A", "B", -0.1), Error);
}

TEST_CASE("partial trace") {
  const Vector phi = (kron(fock_ket(3, 0), fock_ket(3, 1)) + kron(fock_ket(3, 1), fock_ket(3, 0))) / std::sqrt(2.0);
  const auto s = MultiModeState::from_ket({{"A", 3}, {"B", 3}}, phi);
  const auto a = partial_trace(s, {"A"});
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = expect(1, 1) = 0.5;
  CHECK(max_abs(a.matrix() - expect) < 1e-14);
  CHECK(max_abs(partial_trace(s, {"A", "B"}).matrix() - s.matrix()) < 1e-15);
  CHECK_THROWS_AS(partial_trace(s, {}), Error);
  CHECK_THROWS_AS(partial_trace(s, {"Q"}), Error);

  // Keep order follows the keep list.
  std::mt19937_64 rng(3);
  const MultiModeState x({{"A", 2}}, testutil::random_density(2, rng));
  const MultiModeState y({{"B", 3}}, testutil::random_density(3, rng));
  const MultiModeState z({{"C", 2}}, testutil::random_density(2, rng));
  const auto xyz = tensor(tensor(x, y), z);
  const auto zx = partial_trace(xyz, {"C", "A"});
  CHECK(zx.labels() == std::vector<std::string>{"C", "A"});
  CHECK(max_abs(zx.matrix() - tensor(z, x).matrix()) < 1e-12);
}

TEST_CASE("partial transpose of a product is the product of transposes") {
  std::mt19937_64 rng(5);
  const MultiModeState x({{"A", 2}}, testutil::random_density(2, rng));
  const MultiModeState y({{"B", 3}}, testutil::random_density(3, rng));
  const Matrix pt = partial_transpose(tensor(x, y), {"B"});
  const MultiModeState yt({{"B", 3}}, y.matrix().transpose());
  CHECK(max_abs(pt - tensor(x, yt).matrix()) < 1e-14);
}

TEST_CASE("loss Kraus operators are complete") {
  for (double eta : {0.0, 0.3, 0.85, 1.0}) {
    const auto ks = loss_kraus(6, eta);
    Matrix sum = Matrix::Zero(6, 6);
    for (const auto& k : ks) sum += k.adjoint() * k;
    CHECK(max_abs(sum - Matrix::Identity(6, 6)) < 1e-12);
  }
}

TEST_CASE("Hermite functions match the explicit polynomials") {
  for (double x : {-3.1, -0.4, 0.0, 0.7, 2.5}) {
    const auto psi = hermite_functions(12, x);
    for (int n = 0; n < 12; ++n) CHECK(psi[n] == doctest::Approx(psi_closed(n, x)).epsilon(1e-10));
  }
}

TEST_CASE("homodyne window") {
  const auto w = homodyne_window(1.0, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if ((i - j) % 2 != 0) CHECK(w.matrix(i, j) == 0.0);
  // psi_0^2 = e^{-x^2}/sqrt(pi): A00 = erf(h), and A11 = A00 - 2h e^{-h^2}/sqrt(pi), h = sigma0/2.
  const double h = 0.5 * kSigma0;
  CHECK(w.matrix(0, 0) == doctest::Approx(std::erf(h)).epsilon(1e-12));
  const double a11 = std::erf(h) - 2.0 * h * std::exp(-h * h) / std::sqrt(M_PI);
  CHECK(w.matrix(1, 1) == doctest::Approx(a11).epsilon(1e-9));
  CHECK(w.matrix(1, 1) / w.matrix(0, 0) == doctest::Approx(0.080).epsilon(0.005 / 0.080));

  CHECK(max_abs(homodyne_window(kInfinity, 5).matrix.cast<Complex>() - Matrix::Identity(5, 5)) == 0.0);
  // A very wide window approaches the identity.
  CHECK((homodyne_window(40.0, 8).matrix - RealMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);

  CHECK_THROWS_AS(homodyne_window(0.0, 4), Error);
  CHECK_THROWS_AS(homodyne_window(-1.0, 4), Error);

  // Zero-limit direction: A / (delta sigma0) -> psi_i(0) psi_j(0).
  const double small = 1e-4;
  const RealMatrix lim = homodyne_window_zero_limit(6);
  const RealMatrix scaled = homodyne_window(small, 6).matrix / (small * kSigma0);
  CHECK((scaled - lim).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("homodyne window is between 0 and 1 and monotone in delta") {
  const std::vector<double> deltas = {0.1, 0.5, 1.0, 2.0, 4.0, 10.0};
  RealMatrix prev = RealMatrix::Zero(10, 10);
  for (double d : deltas) {
    const RealMatrix a = homodyne_window(d, 10).matrix;
    Eigen::SelfAdjointEigenSolver<RealMatrix> e(a);
    CHECK(e.eigenvalues().minCoeff() >= -1e-12);
    CHECK(e.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
    Eigen::SelfAdjointEigenSolver<RealMatrix> diff(a - prev);
    CHECK(diff.eigenvalues().minCoeff() >= -1e-12);
    prev = a;
  }
}

TEST_CASE("conditioning on an infinite window is a partial trace") {
  std::mt19937_64 rng(9);
  const MultiModeState s({{"A", 2}, {"C", 3}, {"D", 2}}, testutil::random_density(12, rng));
  const auto cond = condition_on_window(s, "C", homodyne_window(kInfinity, 3).matrix);
  CHECK(cond.labels() == std::vector<std::string>{"A", "D"});
  CHECK(max_abs(cond.matrix() - partial_trace(s, {"A", "D"}).matrix()) < 1e-14);
}

TEST_CASE("operations keep states Hermitian and positive") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const MultiModeState s({{"A", 3}, {"B", 3}, {"C", 4}}, testutil::random_density(36, rng, 3));
    const auto bs = apply_beamsplitter(s, "B", "C", 0.37);
    const auto lossy = apply_kraus(bs, "C", loss_kraus(4, 0.6));
    const auto red = partial_trace(lossy, {"C", "A"});
    for (const auto* st : {&bs, &lossy, &red}) {
      const auto chk = check_state(*st);
      CHECK(chk.hermiticity_error < 1e-10);
      CHECK(chk.min_eigenvalue > -1e-8);
    }
    const auto cond = condition_on_window(bs, "C", homodyne_window(1.0, 4).matrix);
    CHECK(check_state(cond.normalized()).min_eigenvalue > -1e-8);
  }
}

TEST_CASE("apply_operator matches the full Kronecker operator") {
  std::mt19937_64 rng(2);
  const MultiModeState s({{"A", 2}, {"B", 3}, {"C", 2}}, testutil::random_density(12, rng));
  const Matrix op = testutil::random_unitary(2, rng);
  // Full operator on C in Kronecker order: I_6 x op.
  Matrix full = Matrix::Zero(12, 12);
  for (int k = 0; k < 6; ++k) full.block(2 * k, 2 * k, 2, 2) = op;
  const auto out = apply_operator(s, {"C"}, op);
  CHECK(max_abs(out.matrix() - full * s.matrix() * full.adjoint()) < 1e-12);
  CHECK_THROWS_AS(apply_operator(s, {"C"}, Matrix::Identity(3, 3)), Error);
}
