#include "hybridswap/timing.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hybridswap/error.hpp"
#include "hybridswap/states.hpp"

namespace hybridswap {
namespace {

constexpr double kNsPerSecond = 1e9;

double mode_rate(const TimingConfig& cfg) { return 2.0 * M_PI * cfg.gamma_mhz * 1e-3; }  // 1/ns

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::config, what);
}

std::vector<double> poisson_times(double rate_hz, double duration, std::mt19937_64& rng) {
  std::vector<double> out;
  if (rate_hz <= 0.0) return out;
  std::exponential_distribution<double> gap(rate_hz / kNsPerSecond);
  for (double t = gap(rng); t < duration; t += gap(rng)) out.push_back(t);
  return out;
}

struct Candidate {
  EventRecord rec;
  bool gated = false;  // on the heralding path, subject to the AOM
};

bool earlier(const Candidate& a, const Candidate& b) { return a.rec.time < b.rec.time; }

}  // namespace

std::string to_string(Detector d) {
  switch (d) {
    case Detector::alpha: return "alpha";
    case Detector::beta: return "beta";
    case Detector::gamma: return "gamma";
  }
  return "?";
}

std::string to_string(TriggerMode m) { return m == TriggerMode::shared ? "shared" : "gamma"; }

void TimingConfig::validate() const {
  require(dt_dl > 0 && dt_fiber > 0 && dead_time > 0 && aom_shutoff > 0 && aom_hold > 0, "times must be > 0");
  require(capture_window > 0 && filter_window > 0, "windows must be > 0");
  require(gamma_mhz > 0, "gamma_mhz must be > 0");
  require(aom_extinction >= 0 && aom_extinction <= 1, "aom_extinction must lie in [0,1]");
  require(delay_line_transmission >= 0 && delay_line_transmission <= 1,
          "delay_line_transmission must lie in [0,1]");
  require(bsm_click_probability >= 0 && bsm_click_probability <= 1, "bsm_click_probability must lie in [0,1]");
  require(rate_alpha >= 0 && rate_beta >= 0 && dark_rate >= 0, "rates must be >= 0");
  require(std::isfinite(rate_alpha) && std::isfinite(rate_beta) && std::isfinite(dark_rate), "rates must be finite");
}

double TimingConfig::temporal_width() const { return 2.0 * std::log(100.0) / mode_rate(*this); }

std::string origin_label(const EventRecord& e) {
  switch (e.origin) {
    case Origin::signal: return "signal";
    case Origin::dark: return "dark";
    case Origin::false_positive: return "false_positive";
    case Origin::echo: return "echo_" + std::to_string(e.passes);
  }
  return "?";
}

std::vector<EventRecord> simulate_streams(const TimingConfig& cfg, double duration) {
  cfg.validate();
  if (!(duration > 0.0)) throw Error(ErrorCode::invalid_argument, "duration must be > 0");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::exponential_distribution<double> jitter_mag(mode_rate(cfg));
  auto jitter = [&]() { return uni(rng) < 0.5 ? -jitter_mag(rng) : jitter_mag(rng); };

  std::vector<Candidate> shared, beta;
  std::uint64_t next_id = 1;

  // Photon released at `start`; returns the loop transits before it leaves
  // for the tap, or -1 if it is lost in the loop.
  auto transits = [&]() {
    for (int k = 0;; ++k) {
      if (uni(rng) < 0.5) return k;
      if (uni(rng) >= cfg.delay_line_transmission) return -1;
    }
  };
  auto emit_photon = [&](double start, int offset, Detector herald, std::uint64_t id) {
    const int k = transits();
    if (k < 0 || uni(rng) >= cfg.bsm_click_probability) return;
    const int lag = k + offset;
    const double t = start + lag * cfg.dt_dl + jitter() + cfg.dt_fiber;
    if (t < 0.0 || t >= duration) return;
    EventRecord e;
    e.time = t;
    e.source = id;
    e.detector = Detector::gamma;
    e.origin = lag == 1 ? Origin::signal : Origin::echo;
    e.herald = herald;
    e.passes = static_cast<std::int16_t>(lag);
    shared.push_back({e, false});
  };

  for (double t : poisson_times(cfg.rate_alpha, duration, rng)) {
    const std::uint64_t id = next_id++;
    EventRecord e;
    e.time = t;
    e.source = id;
    e.detector = Detector::alpha;
    e.herald = Detector::alpha;
    shared.push_back({e, true});
    emit_photon(t, 0, Detector::alpha, id);
  }
  for (double t : poisson_times(cfg.rate_beta, duration, rng)) {
    const std::uint64_t id = next_id++;
    EventRecord e;
    e.time = t;
    e.source = id;
    e.detector = Detector::beta;
    e.herald = Detector::beta;
    beta.push_back({e, false});
    emit_photon(t, 1, Detector::beta, id);
  }
  for (auto [det, list] : {std::pair{Detector::gamma, &shared}, std::pair{Detector::beta, &beta}}) {
    for (double t : poisson_times(cfg.dark_rate, duration, rng)) {
      EventRecord e;
      e.time = t;
      e.detector = det;
      e.origin = Origin::dark;
      e.herald = det;
      list->push_back({e, false});
    }
  }

  std::vector<EventRecord> out;
  out.reserve(shared.size() + beta.size());

  // Alpha/gamma detector: AOM gating of the heralding path, then dead time.
  std::stable_sort(shared.begin(), shared.end(), earlier);
  std::vector<double> accepted;
  for (auto& c : shared) {
    const double t = c.rec.time;
    if (c.gated) {
      const auto it = std::lower_bound(accepted.begin(), accepted.end(), t - cfg.aom_shutoff - cfg.aom_hold);
      const bool gated = it != accepted.end() && *it <= t - cfg.aom_shutoff;
      if (gated) {
        if (uni(rng) < cfg.aom_extinction) continue;
        c.rec.origin = Origin::false_positive;
      }
    }
    if (!accepted.empty() && t - accepted.back() < cfg.dead_time) continue;
    accepted.push_back(t);
    out.push_back(c.rec);
  }
  std::stable_sort(beta.begin(), beta.end(), earlier);
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& c : beta) {
    if (c.rec.time - last < cfg.dead_time) continue;
    last = c.rec.time;
    out.push_back(c.rec);
  }
  std::stable_sort(out.begin(), out.end(), [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  return out;
}

// ---------------------------------------------------------------------------

CoincidenceHistograms coincidence_histogram(const std::vector<EventRecord>& events, const HistogramSpec& spec) {
  if (!(spec.window > 0.0) || !(spec.bin_width > 0.0))
    throw Error(ErrorCode::invalid_argument, "window and bin width must be > 0");
  const auto bins = static_cast<std::size_t>(std::ceil(spec.window / spec.bin_width));
  CoincidenceHistograms h;
  h.alpha = {-double(bins) * spec.bin_width, spec.bin_width, std::vector<double>(bins, 0.0)};
  h.beta = h.alpha;
  auto is_trigger = [&](const EventRecord& e) {
    return spec.trigger == TriggerMode::shared ? e.detector != Detector::beta : e.detector == Detector::gamma;
  };
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!is_trigger(events[i])) continue;
    h.triggers.push_back(i);
    const double T = events[i].time;
    for (std::size_t j = i; j-- > 0;) {
      const double dt = events[j].time - T;
      if (dt < -spec.window) break;
      if (dt >= 0.0) continue;
      const EventRecord& e = events[j];
      if (spec.trigger == TriggerMode::gamma && e.detector == Detector::gamma) continue;
      const auto bin = static_cast<std::size_t>(std::floor((dt - h.alpha.start) / spec.bin_width));
      if (bin >= bins) continue;
      (e.detector == Detector::beta ? h.beta : h.alpha).counts[bin] += 1.0;
      h.pairs.push_back({i, j, dt});
    }
  }
  if (h.triggers.empty()) throw Error(ErrorCode::invalid_argument, "no triggers found");
  std::sort(h.pairs.begin(), h.pairs.end(), [](const CoincidencePair& a, const CoincidencePair& b) {
    return a.trigger != b.trigger ? a.trigger < b.trigger : a.event < b.event;
  });
  h.alpha_peaks = find_peaks(h.alpha);
  h.beta_peaks = find_peaks(h.beta);
  return h;
}

std::vector<double> find_peaks(const Histogram& h, double min_separation, double threshold) {
  const auto n = h.counts.size();
  if (n < 3) return {};
  const int half = 2;
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int d = -half; d <= half; ++d) {
      const auto k = static_cast<long>(i) + d;
      if (k >= 0 && k < static_cast<long>(n)) s[i] += h.counts[k];
    }
  std::vector<double> sorted = s;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double base = sorted[n / 2];
  const double level = base + threshold * std::sqrt(std::max(base, 1.0));
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? s[i - 1] : -1.0, right = i + 1 < n ? s[i + 1] : -1.0;
    if (s[i] > level && s[i] >= left && s[i] > right) cand.push_back(i);
  }
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<double> peaks;
  const double per_bin = base / (2 * half + 1);
  for (std::size_t i : cand) {
    double wsum = 0.0, tsum = 0.0;
    for (long k = static_cast<long>(i) - 3; k <= static_cast<long>(i) + 3; ++k) {
      if (k < 0 || k >= static_cast<long>(n)) continue;
      const double w = std::max(0.0, h.counts[k] - per_bin);
      wsum += w;
      tsum += w * h.center(k);
    }
    const double c = wsum > 0.0 ? tsum / wsum : h.center(i);
    if (std::all_of(peaks.begin(), peaks.end(), [&](double p) { return std::abs(p - c) >= min_separation; }))
      peaks.push_back(c);
  }
  return peaks;
}

std::vector<CoincidencePair> time_filter(const std::vector<CoincidencePair>& pairs, double center, double width) {
  if (!(width > 0.0)) throw Error(ErrorCode::invalid_argument, "filter width must be > 0");
  std::vector<CoincidencePair> out;
  for (const auto& p : pairs)
    if (std::abs(p.dt - center) <= 0.5 * width) out.push_back(p);
  return out;
}

std::vector<std::size_t> triggers_with(const std::vector<EventRecord>& events,
                                       const std::vector<CoincidencePair>& pairs,
                                       const std::vector<Detector>& detectors) {
  auto matches = [](Detector want, Detector got) {
    return want == got || (want == Detector::alpha && got == Detector::gamma) ||
           (want == Detector::gamma && got == Detector::alpha);
  };
  std::vector<std::size_t> out;
  std::size_t i = 0;
  while (i < pairs.size()) {
    const std::size_t trig = pairs[i].trigger;
    std::vector<bool> seen(detectors.size(), false);
    for (; i < pairs.size() && pairs[i].trigger == trig; ++i)
      for (std::size_t d = 0; d < detectors.size(); ++d)
        if (matches(detectors[d], events[pairs[i].event].detector)) seen[d] = true;
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) out.push_back(trig);
  }
  return out;
}

TriggerComposition classify_triggers(const std::vector<EventRecord>& events, const std::vector<std::size_t>& triggers) {
  TriggerComposition c;
  for (std::size_t i : triggers) {
    const EventRecord& e = events.at(i);
    ++c.total;
    if (e.origin == Origin::dark) {
      ++c.dark;
    } else if (e.detector == Detector::gamma && e.origin == Origin::signal) {
      ++c.signal;
    } else {
      ++c.false_positive;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

TimingEstimate estimate_timing(const TimingConfig& cfg) {
  cfg.validate();
  const double ns = 1.0 / kNsPerSecond;
  const double q = cfg.echo_ratio();
  const double p = cfg.bsm_click_probability;
  const double ra = cfg.rate_alpha * ns, rb = cfg.rate_beta * ns, d = cfg.dark_rate * ns;
  const double leave = 0.5 / (1.0 - q);  // sum_k 1/2 q^k

  TimingEstimate est;
  const double gamma_all = p * (ra + rb) * leave;
  const double gamma_sig = p * (0.5 * q * ra + 0.5 * rb);

  // Self-consistent gating: the heralding path is gated whenever a detection
  // fell in the preceding [shutoff + hold, shutoff] interval.
  double gated = 0.0, shared = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double offered = ra * (1.0 - cfg.aom_extinction * gated) + gamma_all + d;
    shared = offered / (1.0 + offered * cfg.dead_time);
    gated = 1.0 - std::exp(-shared * cfg.aom_hold);
  }
  const double live = 1.0 / (1.0 + shared * cfg.dead_time);
  const double beta = (rb + d) / (1.0 + (rb + d) * cfg.dead_time);
  const double herald_kept = (1.0 - cfg.aom_extinction * gated) * live;  // an alpha herald is recorded

  est.shared_rate = shared / ns;
  est.beta_rate = beta / ns;
  est.gamma_rate = gamma_all * live / ns;
  est.gamma_signal_rate = gamma_sig * live / ns;
  est.aom_gated_fraction = gated;
  const double w = cfg.filter_window;
  est.window_pass = 1.0 - std::exp(-mode_rate(cfg) * 0.5 * w);
  const double pj = est.window_pass;

  // Heralding-path triggers: a shared event in the filter window keeps the
  // AOM gated at the trigger, so only the leak fraction arrives.
  const double leak = ra * (1.0 - cfg.aom_extinction);
  const double wrong = leak + (gamma_all - gamma_sig);

  // Pairs: trigger and any shared event in the window.
  {
    const double sig = ra * herald_kept * 0.5 * q * p * pj + gamma_sig * shared * w;
    const double fp = wrong * shared * w;
    const double dark = d * shared * w;
    const double tot = sig + fp + dark;
    est.pair_false_positive = tot > 0 ? fp / tot : 0.0;
    est.pair_dark = tot > 0 ? dark / tot : 0.0;
  }
  // Triples: trigger, shared event and beta event in the window.
  {
    const double beta_kept = beta / std::max(rb + d, 1e-300);
    const double sig = ra * herald_kept * 0.5 * q * p * pj * beta * w +
                       rb * beta_kept * 0.5 * p * pj * shared * w + gamma_sig * shared * w * beta * w;
    const double fp = wrong * shared * w * beta * w;
    const double dark = d * shared * w * beta * w;
    const double tot = sig + fp + dark;
    est.triple_false_positive = tot > 0 ? fp / tot : 0.0;
    est.triple_dark = tot > 0 ? dark / tot : 0.0;
    est.triple_rate_filtered = tot * live / ns;
  }
  const double cw = cfg.capture_window;
  est.triple_rate_unfiltered = shared * (1.0 - std::exp(-shared * cw)) * (1.0 - std::exp(-beta * cw)) / ns;
  return est;
}

// ---------------------------------------------------------------------------

namespace {

// Peaks of an excess trace: 5-bin means above median + threshold * robust sigma.
std::vector<double> trace_peaks(const std::vector<double>& t, const std::vector<double>& v, double min_separation,
                                double threshold) {
  const auto n = v.size();
  if (n < 5) return {};
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    int c = 0;
    for (long k = static_cast<long>(i) - 2; k <= static_cast<long>(i) + 2; ++k)
      if (k >= 0 && k < static_cast<long>(n)) {
        s[i] += v[k];
        ++c;
      }
    s[i] /= c;
  }
  auto median = [](std::vector<double> x) {
    std::nth_element(x.begin(), x.begin() + x.size() / 2, x.end());
    return x[x.size() / 2];
  };
  const double m = median(s);
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(s[i] - m);
  const double sigma = std::max(1.4826 * median(dev), 1e-12);
  std::vector<std::size_t> cand;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (s[i] > m + threshold * sigma && s[i] >= s[i - 1] && s[i] > s[i + 1]) cand.push_back(i);
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<double> peaks;
  for (std::size_t i : cand)
    if (std::all_of(peaks.begin(), peaks.end(), [&](double p) { return std::abs(p - t[i]) >= min_separation; }))
      peaks.push_back(t[i]);
  return peaks;
}

// The DV half of the hybrid state holds one photon with probability 1/2.
constexpr double kHybridDvExcess = 0.5;

double hybrid_cv_mean_photons() {
  double total = 0.0;
  for (Parity par : {Parity::even, Parity::odd}) {
    const Vector k = cat_ket({kDefaultAlpha, par, kDefaultCvDim});
    for (Eigen::Index n = 0; n < k.size(); ++n) total += 0.5 * double(n) * std::norm(k(n));
  }
  return total;
}

}  // namespace

VarianceTrace variance_trace(const std::vector<EventRecord>& events, const std::vector<std::size_t>& triggers,
                             const TimingConfig& cfg, const TraceSpec& spec) {
  cfg.validate();
  if (!(spec.t_max > spec.t_min) || !(spec.bin_width > 0.0))
    throw Error(ErrorCode::invalid_argument, "bad trace range");
  const auto bins = static_cast<std::size_t>(std::ceil((spec.t_max - spec.t_min) / spec.bin_width));
  VarianceTrace out;
  out.triggers = triggers.size();
  out.t.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) out.t[b] = spec.t_min + (b + 0.5) * spec.bin_width;
  out.cv.assign(bins, 0.0);
  out.dv.assign(bins, 0.0);
  if (triggers.empty()) throw Error(ErrorCode::invalid_argument, "no triggers for the variance trace");

  const double lambda = mode_rate(cfg);
  const double reach = 40.0 / lambda;  // e^{-40} is negligible
  const double q = cfg.echo_ratio();
  const double cv_excess = hybrid_cv_mean_photons();
  int max_echo = 0;
  while (0.5 * std::pow(q, max_echo + 1) > 1e-4) ++max_echo;
  const double before = reach + cfg.dt_dl;
  const double after = reach + max_echo * cfg.dt_dl;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss;
  std::vector<double> var_cv(bins), var_dv(bins);
  auto add_mode = [&](std::vector<double>& var, double center, double excess) {
    const double lo = std::max(center - reach, spec.t_min), hi = std::min(center + reach, spec.t_max);
    if (lo >= hi) return;
    const auto b0 = static_cast<std::size_t>(std::floor((lo - spec.t_min) / spec.bin_width));
    const auto b1 = std::min(bins - 1, static_cast<std::size_t>(std::floor((hi - spec.t_min) / spec.bin_width)));
    for (std::size_t b = b0; b <= b1; ++b) var[b] += excess * std::exp(-lambda * std::abs(out.t[b] - center));
  };

  for (std::size_t ti : triggers) {
    const double T = events.at(ti).time;
    std::fill(var_cv.begin(), var_cv.end(), kVacuumVariance);
    std::fill(var_dv.begin(), var_dv.end(), kVacuumVariance);
    const auto first = std::lower_bound(events.begin(), events.end(), T + spec.t_min - after,
                                        [](const EventRecord& e, double t) { return e.time < t; });
    for (auto it = first; it != events.end() && it->time <= T + spec.t_max + before; ++it) {
      if (it->origin == Origin::dark) continue;
      const double s = it->time - T;
      if (it->detector == Detector::alpha) {
        double w = 0.5;
        for (int k = 0; k <= max_echo; ++k, w *= q) add_mode(var_dv, s + k * cfg.dt_dl, w);
      } else if (it->detector == Detector::beta) {
        add_mode(var_cv, s + cfg.dt_dl, cv_excess);
        add_mode(var_dv, s + cfg.dt_dl, kHybridDvExcess);
      }
    }
    for (std::size_t b = 0; b < bins; ++b) {
      const double xc = gauss(rng), xd = gauss(rng);
      out.cv[b] += var_cv[b] * xc * xc;
      out.dv[b] += var_dv[b] * xd * xd;
    }
  }
  const double n = double(triggers.size());
  std::vector<double> ex_cv(bins), ex_dv(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out.cv[b] /= n;
    out.dv[b] /= n;
    ex_cv[b] = out.cv[b] - kVacuumVariance;
    ex_dv[b] = out.dv[b] - kVacuumVariance;
  }
  out.cv_peaks = trace_peaks(out.t, ex_cv, 20.0, 6.0);
  out.dv_peaks = trace_peaks(out.t, ex_dv, 20.0, 6.0);
  return out;
}

}  // namespace hybridswap
