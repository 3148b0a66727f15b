#pragma once

// Monte-Carlo model of the heralding and coincidence chain.
//
// Times are in ns and rates in Hz. Detector alpha and detector gamma are one
// physical SNSPD reached through two optical paths (the heralding path and the
// fiber-delayed BSM tap); they share dead time and every detection on it
// re-triggers the AOM that gates the heralding path. Detector beta heralds the
// hybrid state.
//
// Geometry used by the simulation:
//   * an alpha herald at t releases a photon that reaches the BSM tap after
//     k loop transits, at t + k dt_dl (k = 0 is the direct path);
//   * a beta herald at t releases the C photon, which reaches the tap at
//     t + (k + 1) dt_dl;
//   * at every arrival the photon leaves for the tap with probability 1/2 and
//     otherwise makes another transit, surviving it with delay_line_transmission;
//   * a photon at the tap clicks the gamma path with bsm_click_probability,
//     and is recorded dt_fiber later.
// The protocol photon is the one with a total lag of exactly one transit, so a
// correct trigger at T has its heralds at T - dt_dl - dt_fiber.

#include <cstdint>
#include <string>
#include <vector>

namespace hybridswap {

enum class Detector : std::uint8_t { alpha, beta, gamma };
enum class Origin : std::uint8_t { signal, echo, dark, false_positive };
enum class TriggerMode : std::uint8_t {
  shared,  // every event on the alpha/gamma detector, as the hardware sees it
  gamma,   // ground truth: only events that came through the BSM tap path
};

std::string to_string(Detector d);
std::string to_string(TriggerMode m);

struct TimingConfig {
  double dt_dl = 47.0;
  double dt_fiber = 750.0;
  double dead_time = 100.0;
  double aom_extinction = 0.80;
  double aom_shutoff = 600.0;
  double aom_hold = 1000.0;  // how long the heralding path stays gated
  double delay_line_transmission = 0.85;
  double capture_window = 900.0;
  double filter_window = 8.0;  // total width; 4.0 is the alternative reading
  double gamma_mhz = 65.0;     // OPO bandwidth, sets f(t) = sqrt(pi g) e^{-pi g |t|}
  double rate_alpha = 5.6e4;   // pair rate of the DV source on the heralding path
  double rate_beta = 5.6e4;    // hybrid heralding rate
  double dark_rate = 5.0;      // per physical detector
  double bsm_click_probability = 3.5e-3;
  std::uint64_t seed = 1;

  void validate() const;
  /// Probability that a photon in the loop moves on to the next tap arrival.
  double echo_ratio() const { return 0.5 * delay_line_transmission; }
  /// Full width holding 99% of |f(t)|^2.
  double temporal_width() const;
};

struct EventRecord {
  double time = 0.0;
  std::uint64_t source = 0;  // shared by a herald and its photon; 0 for dark counts
  Detector detector = Detector::alpha;
  Origin origin = Origin::signal;
  Detector herald = Detector::alpha;  // which source released the photon (gamma events)
  std::int16_t passes = -1;           // loop transits before the tap, gamma events only
};

/// "signal", "dark", "false_positive" or "echo_k" with k the loop transits.
std::string origin_label(const EventRecord& e);

/// Time-ordered events over [0, duration). Deterministic in cfg.seed.
std::vector<EventRecord> simulate_streams(const TimingConfig& cfg, double duration);

// ---------------------------------------------------------------------------

struct Histogram {
  double start = 0.0;  // left edge of bin 0
  double bin_width = 1.0;
  std::vector<double> counts;

  double center(std::size_t i) const { return start + (double(i) + 0.5) * bin_width; }
};

struct CoincidencePair {
  std::size_t trigger = 0;  // index into the event list
  std::size_t event = 0;
  double dt = 0.0;  // event time minus trigger time, < 0
};

struct HistogramSpec {
  TriggerMode trigger = TriggerMode::shared;
  double window = 900.0;
  double bin_width = 1.0;
};

struct CoincidenceHistograms {
  std::vector<std::size_t> triggers;
  std::vector<CoincidencePair> pairs;
  Histogram alpha;  // alpha/gamma detector (alpha path only in gamma mode)
  Histogram beta;
  std::vector<double> alpha_peaks;
  std::vector<double> beta_peaks;
};

/// Trigger-aligned histograms of every event in [T - window, T).
/// Throws ErrorCode::invalid_argument when no trigger is present.
CoincidenceHistograms coincidence_histogram(const std::vector<EventRecord>& events, const HistogramSpec& spec = {});

/// Peak centers, strongest first: local maxima of a 5-bin running sum that
/// stand `threshold` Poisson deviations above the median level.
std::vector<double> find_peaks(const Histogram& h, double min_separation = 20.0, double threshold = 5.0);

/// Pairs with |dt - center| <= width / 2.
std::vector<CoincidencePair> time_filter(const std::vector<CoincidencePair>& pairs, double center, double width);

/// Triggers that have at least one pair on each listed detector among `pairs`.
/// Alpha also matches gamma-path events (same physical detector).
std::vector<std::size_t> triggers_with(const std::vector<EventRecord>& events,
                                       const std::vector<CoincidencePair>& pairs,
                                       const std::vector<Detector>& detectors);

struct TriggerComposition {
  std::size_t total = 0;
  std::size_t signal = 0;          // gamma path, protocol photon
  std::size_t false_positive = 0;  // heralding-path events and echoes
  std::size_t dark = 0;

  double signal_fraction() const { return total ? double(signal) / total : 0.0; }
  double false_positive_fraction() const { return total ? double(false_positive) / total : 0.0; }
};

TriggerComposition classify_triggers(const std::vector<EventRecord>& events, const std::vector<std::size_t>& triggers);

// ---------------------------------------------------------------------------

/// First-order rate model of the same chain, used to cross-check the
/// simulation and to feed the false-positive fraction to the channel model.
struct TimingEstimate {
  double shared_rate = 0.0;  // recorded on the alpha/gamma detector
  double beta_rate = 0.0;
  double gamma_rate = 0.0;         // recorded tap clicks
  double gamma_signal_rate = 0.0;  // of which protocol photons
  double aom_gated_fraction = 0.0;
  double window_pass = 0.0;  // P(|jitter| <= filter_window / 2)
  double pair_false_positive = 0.0;  // trigger + shared event in the filter window
  double pair_dark = 0.0;
  double triple_false_positive = 0.0;  // trigger + shared and beta events in the filter window
  double triple_dark = 0.0;
  double triple_rate_unfiltered = 0.0;  // any shared and beta event in the capture window
  double triple_rate_filtered = 0.0;
};

TimingEstimate estimate_timing(const TimingConfig& cfg);

// ---------------------------------------------------------------------------

struct TraceSpec {
  double t_min = -900.0;
  double t_max = 150.0;
  double bin_width = 1.0;
  std::uint64_t seed = 7;
};

struct VarianceTrace {
  std::vector<double> t;
  std::vector<double> cv;  // quadrature variance, vacuum = 1/2
  std::vector<double> dv;
  std::vector<double> cv_peaks;
  std::vector<double> dv_peaks;
  std::size_t triggers = 0;
};

/// Stylized homodyne variance scan around the given triggers. Each trigger
/// contributes one synthetic quadrature sample per time bin with variance
///   1/2 + sum over modes of excess * e^{-2 pi g |t - t_mode|},
/// where every heralding-path event puts a single photon (excess 1) on the DV
/// channel at its own time and its loop echoes, weighted 1/2 (1/2 T)^k, and
/// every beta herald puts the reduced hybrid CV state (excess <n>) on the CV
/// channel and its DV half (excess 1/2) on the DV channel, one transit later.
VarianceTrace variance_trace(const std::vector<EventRecord>& events, const std::vector<std::size_t>& triggers,
                             const TimingConfig& cfg, const TraceSpec& spec = {});

}  // namespace hybridswap
