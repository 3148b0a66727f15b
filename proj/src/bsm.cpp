#include "hybridswap/bsm.hpp"

#include <cmath>

#include "hybridswap/error.hpp"
#include "hybridswap/metrics.hpp"

namespace hybridswap {

void BsmParams::validate() const {
  if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::invalid_argument, "tap reflectivity must lie in [0,1)");
  if (!(delta >= 0.0)) throw Error(ErrorCode::invalid_argument, "window width must be >= 0");
  if (!(eta_hd > 0.0 && eta_hd <= 1.0)) throw Error(ErrorCode::invalid_argument, "eta_hd must lie in (0,1]");
  if (!(eta_spd > 0.0 && eta_spd <= 1.0)) throw Error(ErrorCode::invalid_argument, "eta_spd must lie in (0,1]");
}

MultiModeState combine_inputs(const MultiModeState& dv, const MultiModeState& hy) {
  if (dv.labels() != std::vector<std::string>{"A", "B"})
    throw Error(ErrorCode::label, "DV input must be on modes (A, B)");
  if (hy.labels() != std::vector<std::string>{"C", "D"})
    throw Error(ErrorCode::label, "hybrid input must be on modes (C, D)");
  if (dv.modes()[1].dim != hy.modes()[0].dim)
    throw Error(ErrorCode::invalid_argument, "modes B and C need the same truncation");
  return apply_beamsplitter(tensor(dv, hy), "B", "C", 0.5);
}

MultiModeState apply_click(const MultiModeState& s, std::string_view mode, double r, double eta_spd) {
  const int d = s.modes()[s.index_of(mode)].dim;
  // K_k removes k photons into the tap; each of them clicks with eta_spd.
  const auto kraus = loss_kraus(d, 1.0 - r);
  std::vector<double> weights(kraus.size());
  for (std::size_t k = 1; k < weights.size(); ++k) weights[k] = 1.0 - std::pow(1.0 - eta_spd, static_cast<double>(k));
  return apply_kraus(s, mode, kraus, weights);
}

BsmOutcome apply_bsm_window(const MultiModeState& combined, const BsmParams& p, const RealMatrix& window) {
  p.validate();
  const auto c = combined.index_of("C");
  combined.index_of("B");
  if (combined.modes()[c].dim < 3) throw Error(ErrorCode::truncation, "mode C needs at least 3 Fock levels");
  BsmOutcome out;
  if (p.r == 0.0) return out;
  auto s = apply_click(combined, "C", p.r, p.eta_spd);
  if (p.eta_hd < 1.0) {
    const auto kraus = loss_kraus(combined.modes()[c].dim, p.eta_hd);
    s = apply_kraus(s, "C", kraus);
  }
  s = condition_on_window(s, "C", window);
  s = partial_trace(s, {"A", "D"});
  const double prob = s.trace();
  if (!(prob > 0.0) || !std::isfinite(prob)) return out;
  out.success_probability = prob;
  out.state = s.normalized();
  return out;
}

BsmOutcome apply_bsm(const MultiModeState& combined, const BsmParams& p) {
  p.validate();
  if (p.delta == 0.0) return {};
  const int dc = combined.modes()[combined.index_of("C")].dim;
  return apply_bsm_window(combined, p, homodyne_window(p.delta, dc).matrix);
}

MultiModeState swap_target(double alpha, int dv_dim, int cv_dim) {
  return hybrid_entangled(alpha, dv_dim, cv_dim, "A", "D");
}

std::vector<BsmSweepRow> sweep_bsm(const MultiModeState& dv, const MultiModeState& hy, const BsmSweepSpec& spec,
                                   double alpha) {
  const auto combined = combine_inputs(dv, hy);
  const int dc = combined.modes()[combined.index_of("C")].dim;
  const auto target = swap_target(alpha, combined.modes()[combined.index_of("A")].dim,
                                  combined.modes()[combined.index_of("D")].dim);
  std::vector<BsmSweepRow> rows;
  rows.reserve(spec.r_values.size() * spec.delta_values.size());
  for (double r : spec.r_values) {
    for (double delta : spec.delta_values) {
      BsmParams p{r, delta, spec.eta_hd, spec.eta_spd};
      BsmSweepRow row{r, delta, spec.eta_hd, spec.eta_spd, 0.0, 0.0, 0.0};
      const bool zero_window = delta == 0.0;
      const RealMatrix window =
          zero_window ? homodyne_window_zero_limit(dc) : homodyne_window(delta, dc).matrix;
      const auto outcome = apply_bsm_window(combined, p, window);
      if (outcome.has_events()) {
        row.efficiency = zero_window ? 0.0 : outcome.success_probability;
        row.fidelity = fidelity(*outcome.state, target);
        row.purity = purity(*outcome.state);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace hybridswap
