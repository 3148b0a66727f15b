// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria
//   acceptance 4 9        selected ones
//
// Exit status is the number of failed criteria (0 when all pass).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hybridswap/bsm.hpp"
#include "hybridswap/channel.hpp"
#include "hybridswap/metrics.hpp"
#include "hybridswap/states.hpp"
#include "hybridswap/timing.hpp"
#include "hybridswap/tomography.hpp"

using namespace hybridswap;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Verdict()> run;
};

Matrix random_density(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  Matrix rho = m * m.adjoint();
  rho /= rho.trace();
  return 0.5 * (rho + rho.adjoint());
}

// ---------------------------------------------------------------------------

Verdict negativity_oracle() {
  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto b = MultiModeState::from_ket({{"A", 2}, {"B", 2}}, bell);
  const double nb = negativity(b, {"A"});
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int da = 2 + k % 3, db = 2 + k % 4;
    const auto p = tensor(MultiModeState({{"A", da}}, random_density(da, rng)),
                          MultiModeState({{"B", db}}, random_density(db, rng)));
    worst = std::max(worst, std::abs(negativity(p, {"A"})));
  }
  std::ostringstream s;
  s << "Bell " << nb << ", worst product " << worst;
  return {std::abs(nb - 0.5) <= 1e-10 && worst <= 1e-10, s.str()};
}

Verdict window_convention() {
  const auto w = homodyne_window(1.0, 4);
  const double ratio = w.matrix(1, 1) / w.matrix(0, 0);
  std::ostringstream s;
  s << "A11/A00 = " << ratio << " (target 0.080 +- 0.005)";
  return {std::abs(ratio - 0.080) <= 0.005, s.str()};
}

Verdict high_loss_asymptote() {
  std::ostringstream s;
  bool ok = true;
  for (double db : {30.0, 35.0, 40.0}) {
    const auto out = swap_over_channel(single_photon_entangled(), hybrid_entangled(),
                                       ChannelParams::symmetric(db_to_transmission(db)), {1e-3, kInfinity, 1.0, 1.0});
    const double n = out.has_events() ? negativity(*out.state, {"A"}) : -1.0;
    ok = ok && std::abs(n - 0.104) <= 0.005;
    s << db << " dB: " << n << "  ";
  }
  s << "(target 0.104 +- 0.005)";
  return {ok, s.str()};
}

Verdict fig4_crossovers() {
  CurveConfig cfg;
  cfg.loss_db = CurveConfig::grid(0.0, 20.0, 40);
  const auto ideal = negativity_vs_loss_curve(single_photon_entangled(), hybrid_entangled(), cfg);
  const auto exp = negativity_vs_loss_curve(experimental_input_dv(InputModelParams::measured_dv()),
                                            experimental_input_hybrid(InputModelParams::measured_hybrid()), cfg);
  const auto xi = crossover_db(ideal, &CurveRow::swap_actual_bsm);
  const auto xe = crossover_db(exp, &CurveRow::swap_darkcounts);
  std::ostringstream s;
  s << "ideal inputs " << (xi ? std::to_string(*xi) : "none") << " dB (4 +- 1), experimental inputs "
    << (xe ? std::to_string(*xe) : "none") << " dB (9 +- 1.5)";
  return {xi && xe && std::abs(*xi - 4.0) <= 1.0 && std::abs(*xe - 9.0) <= 1.5, s.str()};
}

Verdict fig_a4_band() {
  BsmSweepSpec spec{{BsmParams::ideal().r, 0.10}, {1.0}, 1.0, 1.0};
  const auto rows = sweep_bsm(single_photon_entangled(), hybrid_entangled(), spec);
  const double drop = rows[0].fidelity - rows[1].fidelity;
  const double eff = rows[1].efficiency;
  std::ostringstream s;
  s << "fidelity drop " << drop << " (0.035 +- 0.01), efficiency " << eff << " ([0.005, 0.02])";
  return {std::abs(drop - 0.035) <= 0.01 && eff >= 0.005 && eff <= 0.02, s.str()};
}

Verdict fig_a6_purity() {
  BsmSweepSpec spec{{0.10}, {1.0}, 0.85, 0.70};
  const auto rows = sweep_bsm(single_photon_entangled(), hybrid_entangled(), spec);
  const double p = rows[0].purity;
  std::ostringstream s;
  s << "purity " << p << " ([0.70, 0.85])";
  return {p >= 0.70 && p <= 0.85, s.str()};
}

Verdict input_model() {
  const double n1 = negativity(experimental_input_dv(InputModelParams::measured_dv()), {"A"});
  const double n2 = negativity(experimental_input_hybrid(InputModelParams::measured_hybrid()), {"C"});
  std::ostringstream s;
  s << "DV input " << n1 << " (0.099 +- 0.01), hybrid input " << n2 << " (0.223 +- 0.01)";
  return {std::abs(n1 - 0.099) <= 0.01 && std::abs(n2 - 0.223) <= 0.01, s.str()};
}

Verdict measured_point() {
  const double n = swap_negativity(experimental_input_dv(InputModelParams::measured_dv()),
                                   experimental_input_hybrid(InputModelParams::measured_hybrid()), 0.0,
                                   {0.10, 1.0, 0.85, 1.0}, 0.01, 0.40, kDefaultAlpha);
  std::ostringstream s;
  s << "negativity " << n << " (0.044 +- 0.015)";
  return {std::abs(n - 0.044) <= 0.015, s.str()};
}

Verdict tomography_round_trip() {
  const auto truth = cat_state({kDefaultAlpha, Parity::odd, 12}, "A");
  const auto samples = sample_quadratures(truth, default_phases(12), 200000 / 12, 0.85, 101);
  const double f = fidelity(mle_reconstruct(samples, 12, 0.85).state, truth);

  const auto product = tensor(MultiModeState::from_ket({{"A", 2}}, fock_ket(2, 0)),
                              cat_state({kDefaultAlpha, Parity::even, 12}, "D"));
  const auto phases = default_phases(6);
  const auto joint = sample_joint_quadratures(product, phases, phases, 200000 / 36 + 1, 1.0, 1.0, 102);
  const double n = negativity(two_mode_mle(joint, 2, 4, 1.0, 1.0).state, {"A"});
  std::ostringstream s;
  s << "cat fidelity " << f << " (>= 0.99) from " << samples.size() << " samples, product negativity " << n
    << " (< 0.01) from " << joint.size();
  return {f >= 0.99 && n < 0.01, s.str()};
}

Verdict extrapolation_estimator() {
  // Noiseless data on the model curve.
  std::vector<PartitionValue> exact;
  for (std::size_t n : {500u, 1000u, 2000u, 4000u, 8000u})
    for (int rep = 0; rep < 3; ++rep) exact.push_back({n, 0.4 - 1.7 / std::sqrt(double(n))});
  const auto ef = extrapolate_log_negativity(exact);
  const double exact_err = std::max(std::abs(ef.e_infinity - 0.4), std::abs(ef.c + 1.7));

  // Measured-DV input model on two levels; its partial transpose has one
  // negative eigenvalue, (sqrt(v^2 + g^2) - v) / 2 with g, v the normalized
  // entangled and vacuum weights.
  const auto p = InputModelParams::measured_dv();
  const double total = p.cg + p.cm + p.cv;
  const double g = p.cg / total, v = p.cv / total;
  const double truth = std::log2(2.0 * (0.5 * (std::sqrt(v * v + g * g) - v)) + 1.0);
  const auto state = experimental_input_dv(p, 2, "A", "D");

  const auto phases = default_phases(6);
  PartitionOptions po;
  int covered = 0;
  const int reps = 20;
  std::ostringstream trace;
  for (int rep = 0; rep < reps; ++rep) {
    const auto data = sample_joint_quadratures(state, phases, phases, 7800 / 36 + 1, 1.0, 1.0, 500 + rep);
    const auto fit = extrapolate_log_negativity(partition_log_negativities(data, po, 900 + rep));
    if (std::abs(fit.e_infinity - truth) <= 2.0 * fit.e_infinity_stderr) ++covered;
    trace << " " << (fit.e_infinity - truth) / fit.e_infinity_stderr;
  }
  std::ostringstream s;
  s << "truth " << truth << ", covered " << covered << "/" << reps << " (>= 18), noiseless error " << exact_err
    << " (<= 1e-9); z-scores" << trace.str();
  return {covered * 10 >= reps * 9 && exact_err <= 1e-9, s.str()};
}

Verdict event_timing() {
  TimingConfig c;
  c.bsm_click_probability = 0.1;
  const auto est = estimate_timing(c);
  const auto ev = simulate_streams(c, 1e5 / (est.shared_rate + est.beta_rate) * 1e9);
  const double f = c.dt_fiber, d = c.dt_dl;

  HistogramSpec hs;
  hs.trigger = TriggerMode::gamma;
  const auto h = coincidence_histogram(ev, hs);
  auto near = [&](double t) {
    for (double p : h.alpha_peaks)
      if (std::abs(p - t) <= 3.0) return true;
    return false;
  };
  const bool peaks = near(-f) && near(-d - f) && near(-2 * d - f);

  // Peak areas in +-15 ns windows minus the flat level of the region right
  // after the fiber delay, where no herald can fall.
  auto area = [&](double center, double half) {
    double a = 0.0;
    for (std::size_t i = 0; i < h.alpha.counts.size(); ++i)
      if (std::abs(h.alpha.center(i) - center) <= half) a += h.alpha.counts[i];
    return a;
  };
  const double level = area(-350.0, 300.0) / 600.0 * h.alpha.bin_width;
  const double q = c.echo_ratio(), pk = q / (1.0 + q);
  bool echoes = true;
  std::ostringstream rs;
  for (int k = 0; k < 3; ++k) {
    const double a0 = area(-f - k * d, 15.0) - level * 31.0 / h.alpha.bin_width;
    const double a1 = area(-f - (k + 1) * d, 15.0) - level * 31.0 / h.alpha.bin_width;
    const double frac = a1 / (a0 + a1);
    const double ci = 2.576 * std::sqrt(pk * (1 - pk) / (a0 + a1));
    echoes = echoes && std::abs(frac - pk) <= ci;
    rs << " " << a1 / a0;
  }

  const auto sh = coincidence_histogram(ev, {});
  const auto kept = time_filter(sh.pairs, -d - f, c.filter_window);
  const auto before = classify_triggers(ev, triggers_with(ev, sh.pairs, {Detector::alpha}));
  const auto after = classify_triggers(ev, triggers_with(ev, kept, {Detector::alpha}));
  const bool purer = after.total > 0 && after.signal_fraction() > before.signal_fraction();

  std::ostringstream s;
  s << ev.size() << " events; peaks at -f, -d-f, -2d-f " << (peaks ? "found" : "MISSING") << "; echo ratios"
    << rs.str() << " (expected " << q << ", 99% CI " << (echoes ? "ok" : "violated") << "); signal purity "
    << before.signal_fraction() << " -> " << after.signal_fraction();
  return {peaks && echoes && purer, s.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "negativity oracle", 1.0, negativity_oracle},
      {2, "homodyne window convention", 1.0, window_convention},
      {3, "high-loss asymptote", 30.0, high_loss_asymptote},
      {4, "negativity-vs-loss crossovers", 300.0, fig4_crossovers},
      {5, "BSM fidelity drop and efficiency", 60.0, fig_a4_band},
      {6, "output purity with detection losses", 60.0, fig_a6_purity},
      {7, "input-model negativities", 10.0, input_model},
      {8, "measured-point reproduction", 60.0, measured_point},
      {9, "tomography round trip", 600.0, tomography_round_trip},
      {10, "finite-sample extrapolation", 600.0, extrapolation_estimator},
      {11, "event-timing properties", 120.0, event_timing},
  };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), c.id) == pick.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool ok = v.pass && in_time;
    failed += ok ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s  [%.2f s, limit %.0f s%s]\n", c.id, ok ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), secs, c.limit_s, in_time ? "" : ", TOO SLOW");
    std::fflush(stdout);
  }
  return failed;
}
