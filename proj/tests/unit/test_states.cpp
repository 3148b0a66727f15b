#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "hybridswap/error.hpp"
#include "hybridswap/metrics.hpp"
#include "hybridswap/states.hpp"

using namespace hybridswap;
using testutil::max_abs;

namespace {

double mean_photons(const Vector& v) {
  double n = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) n += k * std::norm(v(k));
  return n;
}

// Weights (g, m, v) normalized; the partial transpose has a single 2x2 block
// [[v, g/2], [g/2, 0]] carrying the only negative eigenvalue.
double mixture_negativity(InputModelParams p) {
  const double t = p.cg + p.cm + p.cv;
  const double g = p.cg / t, v = p.cv / t;
  return 0.5 * (std::sqrt(v * v + g * g) - v);
}

}  // namespace

TEST_CASE("cat states") {
  for (double a : {0.2, 0.9, 1.6}) {
    const Vector plus = cat_ket({a, Parity::even, 20});
    const Vector minus = cat_ket({a, Parity::odd, 20});
    CHECK(std::abs(plus.dot(minus)) < 1e-14);
    CHECK(plus.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int n = 1; n < 20; n += 2) CHECK(std::abs(plus(n)) == 0.0);
    for (int n = 0; n < 20; n += 2) CHECK(std::abs(minus(n)) == 0.0);
  }
  const Vector zero = cat_ket({0.0, Parity::even, 4});
  CHECK(std::abs(zero(0) - 1.0) < 1e-15);
  CHECK_THROWS_AS(cat_ket({0.0, Parity::odd, 4}), Error);
  CHECK_THROWS_AS(cat_ket({-0.1, Parity::even, 4}), Error);

  const double a2 = 0.81;
  CHECK(mean_photons(cat_ket({0.9, Parity::even, 12})) == doctest::Approx(a2 * std::tanh(a2)).epsilon(1e-9));
  CHECK(mean_photons(cat_ket({0.9, Parity::odd, 12})) == doctest::Approx(a2 / std::tanh(a2)).epsilon(1e-9));
  CHECK(a2 * std::tanh(a2) == doctest::Approx(0.542).epsilon(0.002));
  CHECK(a2 / std::tanh(a2) == doctest::Approx(1.210).epsilon(0.002));

  try {
    cat_ket({3.0, Parity::even, 6});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::truncation);
  }
  CHECK(cat_state({0.9, Parity::odd, 12}, "D").labels() == std::vector<std::string>{"D"});
}

TEST_CASE("single-photon entangled state") {
  const auto s = single_photon_entangled();
  CHECK(negativity(s, {"A"}) == doctest::Approx(0.5).epsilon(1e-12));
  Matrix half = Matrix::Zero(3, 3);
  half(0, 0) = half(1, 1) = 0.5;
  CHECK(max_abs(partial_trace(s, {"A"}).matrix() - half) < 1e-14);
  const auto one_zero = MultiModeState::from_ket({{"A", 3}, {"B", 3}}, testutil::kron(fock_ket(3, 1), fock_ket(3, 0)));
  CHECK(max_abs(apply_beamsplitter(one_zero, "A", "B", 0.5).matrix() - s.matrix()) < 1e-12);
}

TEST_CASE("hybrid entangled state") {
  for (double a : {0.4, 0.9, 1.3}) {
    const auto s = hybrid_entangled(a, 3, 16);
    CHECK(negativity(s, {"C"}) == doctest::Approx(0.5).epsilon(1e-10));
    Matrix half = Matrix::Zero(3, 3);
    half(0, 0) = half(1, 1) = 0.5;
    CHECK(max_abs(partial_trace(s, {"C"}).matrix() - half) < 1e-12);
  }
  // Projecting D onto cat_+ leaves C in |1>.
  const auto s = hybrid_entangled();
  const Vector plus = cat_ket({kDefaultAlpha, Parity::even, kDefaultCvDim});
  const Matrix proj_plus = plus * plus.adjoint();
  const auto conditioned = apply_operator(s, {"D"}, proj_plus);
  const auto c = partial_trace(conditioned, {"C"}).normalized();
  CHECK(std::abs(c.matrix()(1, 1) - 1.0) < 1e-12);
  CHECK_THROWS_AS(hybrid_entangled(0.0), Error);
}

TEST_CASE("mixture input models") {
  const InputModelParams pure{1.0, 0.0, 0.0};
  CHECK(experimental_input_dv(pure).matrix() == single_photon_entangled().matrix());
  CHECK(experimental_input_hybrid(pure).matrix() == hybrid_entangled().matrix());

  const auto dv = experimental_input_dv(InputModelParams::measured_dv());
  const auto hy = experimental_input_hybrid(InputModelParams::measured_hybrid());
  CHECK(negativity(dv, {"A"}) == doctest::Approx(mixture_negativity(InputModelParams::measured_dv())).epsilon(1e-10));
  CHECK(negativity(hy, {"C"}) ==
        doctest::Approx(mixture_negativity(InputModelParams::measured_hybrid())).epsilon(1e-10));
  CHECK(std::abs(negativity(dv, {"A"}) - 0.099) <= 0.01);
  CHECK(std::abs(negativity(hy, {"C"}) - 0.223) <= 0.01);

  CHECK(negativity(experimental_input_dv({0, 0, 1}), {"A"}) < 1e-14);
  CHECK(negativity(experimental_input_hybrid({0, 1, 0}), {"C"}) < 1e-12);
  CHECK_THROWS_AS(experimental_input_dv({0, 0, 0}), Error);
  CHECK_THROWS_AS(experimental_input_dv({1, -0.1, 0}), Error);
  CHECK(check_state(hy).min_eigenvalue > -1e-12);
}

TEST_CASE("input negativity is non-increasing in cv and cm") {
  for (double cm : {0.0, 0.05, 0.2, 0.5}) {
    double prev_dv = 1.0, prev_hy = 1.0;
    for (double cv : {0.0, 0.2, 0.5, 1.0, 2.0}) {
      const double ndv = negativity(experimental_input_dv({1.0, cm, cv}), {"A"});
      const double nhy = negativity(experimental_input_hybrid({1.0, cm, cv}), {"C"});
      CHECK(ndv <= prev_dv + 1e-12);
      CHECK(nhy <= prev_hy + 1e-12);
      prev_dv = ndv;
      prev_hy = nhy;
    }
  }
  for (double cv : {0.0, 0.4, 1.0}) {
    double prev = 1.0;
    for (double cm : {0.0, 0.1, 0.3, 1.0, 3.0}) {
      const double n = negativity(experimental_input_hybrid({1.0, cm, cv}), {"C"});
      CHECK(n <= prev + 1e-12);
      prev = n;
    }
  }
}
