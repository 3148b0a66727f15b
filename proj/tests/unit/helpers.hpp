#pragma once

#include <random>

#include "hybridswap/fock.hpp"

namespace testutil {

inline hybridswap::Matrix random_density(int n, std::mt19937_64& rng, int rank = -1) {
  std::normal_distribution<double> g;
  const int k = rank > 0 ? rank : n;
  hybridswap::Matrix m(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = {g(rng), g(rng)};
  hybridswap::Matrix rho = m * m.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

inline hybridswap::Matrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  hybridswap::Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<hybridswap::Matrix> qr(m);
  return qr.householderQ() * hybridswap::Matrix::Identity(n, n);
}

inline double max_abs(const hybridswap::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline hybridswap::Vector kron(const hybridswap::Vector& a, const hybridswap::Vector& b) {
  hybridswap::Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline double min_eig(const hybridswap::Matrix& m) {
  Eigen::SelfAdjointEigenSolver<hybridswap::Matrix> eig(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace testutil
