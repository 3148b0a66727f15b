#pragma once

// Synthetic homodyne data, maximum-likelihood reconstruction and Wigner maps.
//
// Quadrature values are in x units (vacuum variance 1/2, so one sigma0 is
// 1/sqrt(2)). The local-oscillator phase theta measures
// x_theta = x cos(theta) + p sin(theta), with <n|x_theta> = e^{i n theta} psi_n(x).

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hybridswap/fock.hpp"
#include "hybridswap/metrics.hpp"

namespace hybridswap {

struct QuadratureSample {
  double phase = 0.0;
  double value = 0.0;
  std::string mode;
};

struct JointSample {
  double phase_a = 0.0;
  double value_a = 0.0;
  double phase_b = 0.0;
  double value_b = 0.0;
};

/// n phases evenly spaced in [0, pi).
std::vector<double> default_phases(int n = 12);

/// Draws from the exact quadrature marginal of the state after a loss of
/// 1 - efficiency, n_per_phase values per phase. Same seed, same stream.
std::vector<QuadratureSample> sample_quadratures(const MultiModeState& s, std::span<const double> phases,
                                                 std::size_t n_per_phase, double efficiency, std::uint64_t seed);

/// Joint homodyne data on a two-mode state, for every (phase_a, phase_b) pair.
/// Values are drawn on the MLE bin grid and spread uniformly inside a bin.
std::vector<JointSample> sample_joint_quadratures(const MultiModeState& s, std::span<const double> phases_a,
                                                  std::span<const double> phases_b, std::size_t n_per_pair,
                                                  double efficiency_a, double efficiency_b, std::uint64_t seed);

struct MleOptions {
  int max_iters = 3000;
  double tol = 1e-10;      // R rho R counts as stalled once its per-sample gain drops below this
  double gap_tol = 1e-7;   // stop once lambda_max(R) - 1, which bounds the remaining per-sample gain, is below this
  double bin_width = 0.05 * kSigma0;
  double range = 7.0;               // bins cover [-range, range] in x units
  bool compensate = true;           // fold the declared efficiency into the POVM
};

struct MleResult {
  MultiModeState state;
  int iterations = 0;
  bool converged = false;
  bool likelihood_monotone = true;
  double log_likelihood = 0.0;  // per sample
};

MleResult mle_reconstruct(std::span<const QuadratureSample> samples, int dim, double efficiency,
                          const MleOptions& opts = {}, const std::string& label = "A");

MleResult two_mode_mle(std::span<const JointSample> samples, int dim_a, int dim_b, double efficiency_a,
                       double efficiency_b, const MleOptions& opts = {},
                       const std::array<std::string, 2>& labels = {"A", "D"});

// ---------------------------------------------------------------------------
// Wigner functions, normalized so that the integral over x and p is 1.

struct Axis {
  double min = -8.0 * kSigma0;
  double max = 8.0 * kSigma0;
  int points = 101;

  std::vector<double> values() const;
};

struct WignerGrid {
  std::vector<double> x;
  std::vector<double> p;
  RealMatrix values;  // values(ix, ip)
};

WignerGrid wigner(const MultiModeState& s, const Axis& x_axis = {}, const Axis& p_axis = {});

/// Wigner transform of an arbitrary single-mode operator; real part returned.
WignerGrid wigner_of_operator(const Matrix& op, const Axis& x_axis = {}, const Axis& p_axis = {});

/// Blocks (i, j) = Wigner map of <i|rho|j> on the CV mode, i, j in {0, 1}.
std::array<std::array<WignerGrid, 2>, 2> hybrid_density_wigner(const MultiModeState& s, const std::string& dv_mode,
                                                               const std::string& cv_mode, const Axis& x_axis = {},
                                                               const Axis& p_axis = {});

// ---------------------------------------------------------------------------
// Log-negativity on consecutively smaller partitions of one data set.

struct PartitionOptions {
  std::vector<int> divisions = {1, 2, 3, 4, 6, 8};
  int shuffles = 6;
  int dim_a = 2;
  int dim_b = 2;
  double efficiency_a = 1.0;
  double efficiency_b = 1.0;
  MleOptions mle;
};

/// For every division k the data are shuffled `shuffles` times and cut into k
/// equal partitions; each is reconstructed and its log-negativity recorded.
std::vector<PartitionValue> partition_log_negativities(std::span<const JointSample> samples,
                                                       const PartitionOptions& opts, std::uint64_t seed);

}  // namespace hybridswap
