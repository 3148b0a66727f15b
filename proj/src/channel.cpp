#include "hybridswap/channel.hpp"

#include <cmath>

#include "hybridswap/error.hpp"
#include "hybridswap/metrics.hpp"
#include "hybridswap/states.hpp"

namespace hybridswap {

void ChannelParams::validate() const {
  if (!(eta_b > 0.0 && eta_b <= 1.0) || !(eta_c > 0.0 && eta_c <= 1.0))
    throw Error(ErrorCode::invalid_argument, "link transmissions must lie in (0,1]");
  if (!(eta_d >= 0.0) || !std::isfinite(eta_d)) throw Error(ErrorCode::invalid_argument, "eta_d must be >= 0");
  if (!(fp_fraction >= 0.0 && fp_fraction < 1.0))
    throw Error(ErrorCode::invalid_argument, "false-positive fraction must lie in [0,1)");
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be > 0");
}

ChannelParams ChannelParams::symmetric(double eta) {
  ChannelParams cp;
  cp.eta_b = cp.eta_c = std::sqrt(eta);
  return cp;
}

double db_to_transmission(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }
double transmission_to_db(double eta) { return -10.0 * std::log10(eta); }

MultiModeState apply_loss(const MultiModeState& s, std::string_view mode, double eta) {
  const auto k = s.index_of(mode);
  if (eta == 1.0) return s;
  const auto kraus = loss_kraus(s.modes()[k].dim, eta);
  const auto out = apply_kraus(s, mode, kraus);
  return MultiModeState(out.modes(), out.matrix(), s.norm_policy());
}

BsmOutcome swap_over_channel(const MultiModeState& dv, const MultiModeState& hy, const ChannelParams& cp,
                             const BsmParams& bp) {
  cp.validate();
  bp.validate();
  const auto lossy_dv = apply_loss(dv, "B", cp.eta_b);
  const auto lossy_hy = apply_loss(hy, "C", cp.eta_c);
  auto outcome = apply_bsm(combine_inputs(lossy_dv, lossy_hy), bp);
  if (!outcome.has_events()) return outcome;
  const auto& s = *outcome.state;
  const auto admix = vacuum_even_cat(cp.alpha, s.modes()[0].dim, s.modes()[1].dim, "A", "D").matrix();
  Matrix rho = (1.0 - cp.fp_fraction) * s.matrix() + cp.fp_fraction * admix;
  rho += cp.eta_d / (cp.eta_b * cp.eta_c) * admix;
  rho /= rho.trace().real();
  outcome.state = MultiModeState(s.modes(), 0.5 * (rho + rho.adjoint()));
  return outcome;
}

double direct_propagation_negativity(const MultiModeState& hy, double eta, DirectModel model) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::invalid_argument, "transmission must lie in (0,1]");
  const auto labels = hy.labels();
  if (labels.size() != 2) throw Error(ErrorCode::invalid_argument, "direct propagation needs a two-mode state");
  MultiModeState s = hy;
  if (model == DirectModel::symmetric) {
    s = apply_loss(apply_loss(s, labels[0], std::sqrt(eta)), labels[1], std::sqrt(eta));
  } else {
    s = apply_loss(s, labels[0], eta);
  }
  return negativity(s, {labels[0]});
}

std::vector<double> CurveConfig::grid(double lo, double hi, int n) {
  if (n < 2) return {lo};
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

double swap_negativity(const MultiModeState& dv, const MultiModeState& hy, double loss_db, const BsmParams& bp,
                       double eta_d, double fp_fraction, double alpha) {
  ChannelParams cp = ChannelParams::symmetric(db_to_transmission(loss_db));
  cp.eta_d = eta_d;
  cp.fp_fraction = fp_fraction;
  cp.alpha = alpha;
  const auto outcome = swap_over_channel(dv, hy, cp, bp);
  return outcome.has_events() ? negativity(*outcome.state, {"A"}) : 0.0;
}

std::vector<CurveRow> negativity_vs_loss_curve(const MultiModeState& dv, const MultiModeState& hy,
                                               const CurveConfig& cfg) {
  BsmParams no_cond = cfg.actual;
  no_cond.delta = kInfinity;
  std::vector<CurveRow> rows;
  rows.reserve(cfg.loss_db.size());
  for (double db : cfg.loss_db) {
    CurveRow row;
    row.loss_db = db;
    row.swap_ideal_bsm = swap_negativity(dv, hy, db, cfg.ideal, 0.0, 0.0, cfg.alpha);
    row.swap_actual_bsm = swap_negativity(dv, hy, db, cfg.actual, 0.0, 0.0, cfg.alpha);
    row.swap_no_conditioning = swap_negativity(dv, hy, db, no_cond, 0.0, 0.0, cfg.alpha);
    row.swap_darkcounts = swap_negativity(dv, hy, db, cfg.actual, cfg.eta_d, cfg.fp_fraction, cfg.alpha);
    row.direct = direct_propagation_negativity(hy, db_to_transmission(db), cfg.direct);
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> crossover_db(const std::vector<CurveRow>& rows, double CurveRow::*swap) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const double g0 = rows[i].*swap - rows[i].direct;
    const double g1 = rows[i + 1].*swap - rows[i + 1].direct;
    if (g0 < 0.0 && g1 >= 0.0) {
      const double t = g0 / (g0 - g1);
      return rows[i].loss_db + t * (rows[i + 1].loss_db - rows[i].loss_db);
    }
  }
  return std::nullopt;
}

}  // namespace hybridswap
