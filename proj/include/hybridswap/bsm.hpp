#pragma once

// Approximate Bell-state measurement on modes B and C: 50:50 mixing, a weak
// tap of C onto a bucket detector, then a homodyne window on C.
//
// delta is the TOTAL window width in units of sigma0, so a window of half a
// standard deviation on either side of the origin is delta = 1.

#include <optional>
#include <vector>

#include "hybridswap/fock.hpp"
#include "hybridswap/states.hpp"

namespace hybridswap {

struct BsmParams {
  double r = 0.10;      // tap reflectivity, [0, 1)
  double delta = 1.0;   // window width / sigma0, >= 0 or kInfinity
  double eta_hd = 1.0;  // homodyne efficiency, (0, 1]
  double eta_spd = 1.0; // bucket detector efficiency, (0, 1]

  void validate() const;

  /// Vanishing tap and window, standing in for an exact |1><1| projection.
  static BsmParams ideal() { return {1e-6, 1e-4, 1.0, 1.0}; }
};

/// Normalized state on (A, D) plus the heralding probability. `state` is empty
/// when the measurement can never herald (r = 0, delta = 0 or zero weight).
struct BsmOutcome {
  std::optional<MultiModeState> state;
  double success_probability = 0.0;

  bool has_events() const noexcept { return state.has_value(); }
};

/// Tensor the inputs on (A, B) and (C, D) and mix B with C on a 50:50 beamsplitter.
MultiModeState combine_inputs(const MultiModeState& dv, const MultiModeState& hy);

/// Bucket click on the tapped part of C: sum_{k>=1} (1 - (1-eta_spd)^k) K_k rho K_k^dagger
/// with K_k the loss Kraus operators at transmission 1 - r.
MultiModeState apply_click(const MultiModeState& s, std::string_view mode, double r, double eta_spd);

/// Tap, click, homodyne loss, window on C; trace out B and C.
BsmOutcome apply_bsm(const MultiModeState& combined, const BsmParams& p);

/// Same sequence with an explicit window matrix (used for the delta -> 0 direction).
BsmOutcome apply_bsm_window(const MultiModeState& combined, const BsmParams& p, const RealMatrix& window);

struct BsmSweepRow {
  double r = 0.0;
  double delta = 0.0;
  double eta_hd = 1.0;
  double eta_spd = 1.0;
  double efficiency = 0.0;
  double fidelity = 0.0;
  double purity = 0.0;
};

struct BsmSweepSpec {
  std::vector<double> r_values;
  std::vector<double> delta_values;
  double eta_hd = 1.0;
  double eta_spd = 1.0;
};

/// One row per (r, delta), r-major. Fidelity is against the ideal hybrid state
/// on (A, D). At delta = 0 the efficiency is 0 and fidelity/purity come from
/// the delta -> 0 window direction.
std::vector<BsmSweepRow> sweep_bsm(const MultiModeState& dv, const MultiModeState& hy, const BsmSweepSpec& spec,
                                   double alpha = kDefaultAlpha);

/// Ideal hybrid target (|0,cat_-> + |1,cat_+>)/sqrt(2) on (A, D) with the given truncations.
MultiModeState swap_target(double alpha, int dv_dim, int cv_dim);

}  // namespace hybridswap
