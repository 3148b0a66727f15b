#pragma once

// Lossy links to the BSM station, false positives and dark counts, and the
// negativity-vs-loss curves built from them.

#include <optional>
#include <string>
#include <vector>

#include "hybridswap/bsm.hpp"
#include "hybridswap/fock.hpp"

namespace hybridswap {

struct ChannelParams {
  double eta_b = 1.0;        // transmission of the link carrying B
  double eta_c = 1.0;        // transmission of the link carrying C
  double eta_d = 0.0;        // dark counts per positive event
  double fp_fraction = 0.0;  // share of heralds that are false positives
  double alpha = kDefaultAlpha;

  void validate() const;

  /// eta_b = eta_c = sqrt(eta).
  static ChannelParams symmetric(double eta);
};

/// loss_dB = -10 log10(eta) for the total two-link transmission.
double db_to_transmission(double loss_db);
double transmission_to_db(double eta);

/// Pure-loss channel on one mode.
MultiModeState apply_loss(const MultiModeState& s, std::string_view mode, double eta);

/// Loss on B and C, BSM, then (1 - fp) rho + fp P and rho + eta_d/(eta_b eta_c) P
/// with P = |0, cat_+><0, cat_+| on (A, D), renormalized.
BsmOutcome swap_over_channel(const MultiModeState& dv, const MultiModeState& hy, const ChannelParams& cp,
                             const BsmParams& bp);

enum class DirectModel {
  dv_link,    // the whole loss on the DV mode, which is the one sent over the link
  symmetric,  // sqrt(eta) on each mode
};

/// Negativity of the hybrid state sent without swapping through total transmission eta.
double direct_propagation_negativity(const MultiModeState& hy, double eta,
                                     DirectModel model = DirectModel::dv_link);

struct CurveConfig {
  std::vector<double> loss_db;
  BsmParams actual{0.10, 1.0, 0.85, 1.0};
  BsmParams ideal = BsmParams::ideal();
  double eta_d = 0.01;
  double fp_fraction = 0.0;
  double alpha = kDefaultAlpha;
  DirectModel direct = DirectModel::dv_link;

  /// n points evenly spaced in [lo, hi] dB.
  static std::vector<double> grid(double lo, double hi, int n);
};

struct CurveRow {
  double loss_db = 0.0;
  double swap_ideal_bsm = 0.0;
  double swap_actual_bsm = 0.0;
  double swap_no_conditioning = 0.0;
  double swap_darkcounts = 0.0;
  double direct = 0.0;
};

/// Negativity of the swapped state for one BSM/noise setting at one loss; 0 when
/// nothing heralds.
double swap_negativity(const MultiModeState& dv, const MultiModeState& hy, double loss_db, const BsmParams& bp,
                       double eta_d, double fp_fraction, double alpha);

std::vector<CurveRow> negativity_vs_loss_curve(const MultiModeState& dv, const MultiModeState& hy,
                                               const CurveConfig& cfg);

/// Loss in dB where `swap` first rises above `direct` along the grid, refined
/// by linear interpolation; empty if the curves never cross.
std::optional<double> crossover_db(const std::vector<CurveRow>& rows, double CurveRow::*swap);

}  // namespace hybridswap
