#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hybridswap/fock.hpp"

namespace hybridswap {

/// Sum of |negative eigenvalues| of the partial transpose over `side`.
/// `side` must be a non-empty proper subset of the register.
double negativity(const MultiModeState& s, const std::vector<std::string>& side);

/// log2(2N + 1).
double log_negativity_from(double negativity_value);
double log_negativity(const MultiModeState& s, const std::vector<std::string>& side);

/// Uhlmann fidelity, squared convention: (Tr sqrt(sqrt(a) b sqrt(a)))^2.
/// Both states are normalized first.
double fidelity(const MultiModeState& a, const MultiModeState& b);

/// Tr(rho^2) of the normalized state.
double purity(const MultiModeState& s);

// ---------------------------------------------------------------------------
// Finite-sample extrapolation E_N(N) = E_inf + C / sqrt(N).

struct PartitionValue {
  std::size_t size = 0;  // samples in the partition
  double value = 0.0;    // log-negativity reconstructed from it
};

struct SizeMean {
  std::size_t size = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double residual = 0.0;
  double stddev = 0.0;  // spread of the single-partition values, 0 for one value
};

struct NegativityFit {
  double e_infinity = 0.0;
  double c = 0.0;
  double e_infinity_stderr = 0.0;      // fit and sampling terms in quadrature
  double e_infinity_fit_stderr = 0.0;  // ordinary least squares on the size means
  double sampling_stderr = 0.0;        // sqrt(v / N_max), v the pooled n s_n^2
  double c_stderr = 0.0;
  std::vector<SizeMean> table;  // ordered by increasing size
};

/// Ordinary least squares of the per-size means against 1/sqrt(N). Needs at
/// least three distinct sizes. The intercept error adds the sampling noise of
/// the largest partition, estimated from the per-size spreads assuming a
/// variance that falls as 1/N.
NegativityFit extrapolate_log_negativity(std::span<const PartitionValue> values);

}  // namespace hybridswap
