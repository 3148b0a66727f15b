#include "hybridswap/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hybridswap/bsm.hpp"
#include "hybridswap/channel.hpp"
#include "hybridswap/error.hpp"
#include "hybridswap/metrics.hpp"
#include "hybridswap/states.hpp"
#include "hybridswap/timing.hpp"
#include "hybridswap/tomography.hpp"

namespace hybridswap::cli {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::config, msg); }

// ---------------------------------------------------------------------------
// Defaults. Every key an experiment reads is listed here; nothing else is accepted.

Json fig4_defaults() {
  return {
      {"seed", 1},
      {"alpha", kDefaultAlpha},
      {"loss_min_db", 0.0},
      {"loss_max_db", 20.0},
      {"points", 41},
      {"r", 0.10},
      {"delta", 1.0},
      {"eta_hd", 0.85},
      {"eta_spd", 1.0},
      {"eta_d", 0.01},
      {"fp_fraction", 0.0},
      {"measured_fp_fraction", 0.40},
      {"direct_model", "dv_link"},
      {"fiber_db_per_km", 0.2},
  };
}

Json bsm_sweep_defaults() {
  return {
      {"seed", 1},
      {"alpha", kDefaultAlpha},
      {"inputs", "ideal"},
      {"r_values", {0.01, 0.025, 0.05, 0.075, 0.10, 0.125, 0.15, 0.175, 0.20}},
      {"delta_values", {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0}},
      {"eta_hd", 1.0},
      {"eta_spd", 1.0},
      {"lossy_eta_hd", 0.85},
      {"lossy_eta_spd", 0.70},
      {"reference_r", 0.10},
      {"reference_delta", 1.0},
  };
}

Json swap_defaults() {
  return {
      {"seed", 1},
      {"alpha", kDefaultAlpha},
      {"inputs", "experimental"},
      {"r", 0.10},
      {"delta", 1.0},
      {"eta_hd", 0.85},
      {"eta_spd", 1.0},
      {"eta_d", 0.0},
      {"fp_fraction", 0.0},
      {"wigner_extent", 4.0},
      {"wigner_points", 61},
      {"tomography_samples", 0},
      {"tomography_phases", 6},
      {"tomography_dim_cv", 6},
  };
}

Json tomography_defaults() {
  return {
      {"seed", 1},
      {"alpha", kDefaultAlpha},
      {"phases", 12},
      {"efficiency", 0.85},
      {"cat_samples", 200000},
      {"cat_dim", 12},
      {"joint_phases", 6},
      {"joint_samples", 200000},
      {"product_dim_b", 4},
      {"fit_samples", 7800},
      {"fit_dim_b", 6},
      {"fit_r", 0.10},
      {"fit_delta", 1.0},
      {"divisions", {1, 2, 3, 4, 6, 8}},
      {"shuffles", 6},
      {"write_samples", true},
  };
}

Json events_defaults() {
  const TimingConfig t;
  return {
      {"seed", 1},
      {"duration_s", 2.0},
      {"trigger", "shared"},
      {"dt_dl", t.dt_dl},
      {"dt_fiber", t.dt_fiber},
      {"dead_time", t.dead_time},
      {"aom_extinction", t.aom_extinction},
      {"aom_shutoff", t.aom_shutoff},
      {"aom_hold", t.aom_hold},
      {"delay_line_transmission", t.delay_line_transmission},
      {"capture_window", t.capture_window},
      {"filter_window", t.filter_window},
      {"gamma_mhz", t.gamma_mhz},
      {"rate_alpha", t.rate_alpha},
      {"rate_beta", t.rate_beta},
      {"dark_rate", t.dark_rate},
      {"bsm_click_probability", t.bsm_click_probability},
      {"hist_bin", 1.0},
      {"trace_bin", 1.0},
      {"write_events", true},
  };
}

// ---------------------------------------------------------------------------
// Typed access.

double num(const Json& c, const char* k) { return c.at(k).get<double>(); }
long long integer(const Json& c, const char* k) { return c.at(k).get<long long>(); }
std::string str(const Json& c, const char* k) { return c.at(k).get<std::string>(); }
bool flag(const Json& c, const char* k) { return c.at(k).get<bool>(); }
std::vector<double> nums(const Json& c, const char* k) { return c.at(k).get<std::vector<double>>(); }

long long positive(const Json& c, const char* k) {
  const long long v = integer(c, k);
  if (v <= 0) config_error(std::string(k) + " must be positive");
  return v;
}

std::size_t per_cell(long long total, std::size_t cells) {
  return static_cast<std::size_t>((total + static_cast<long long>(cells) - 1) / static_cast<long long>(cells));
}

// Accept `value` for a key whose default is `def`; integers may stand in for floats.
Json coerce(const std::string& key, const Json& def, const Json& value) {
  auto bad = [&] { config_error("key '" + key + "' expects " + def.type_name() + ", got " + value.dump()); };
  if (def.is_number_float()) {
    if (!value.is_number()) bad();
    return value.get<double>();
  }
  if (def.is_number_integer()) {
    if (value.is_number_integer()) return value;
    if (value.is_number_float()) {
      const double d = value.get<double>();
      if (std::floor(d) != d || std::abs(d) > 9e15) bad();
      return static_cast<long long>(d);
    }
    bad();
  }
  if (def.is_boolean() && !value.is_boolean()) bad();
  if (def.is_string() && !value.is_string()) bad();
  if (def.is_array()) {
    if (!value.is_array() || value.empty()) bad();
    for (const auto& v : value)
      if (!v.is_number()) bad();
  }
  return value;
}

void apply(Json& cfg, const std::string& key, const Json& value, const std::string& experiment) {
  if (key == "experiment") {
    if (!value.is_string() || value.get<std::string>() != experiment)
      config_error("config is for experiment " + value.dump() + ", not '" + experiment + "'");
    return;
  }
  if (!cfg.contains(key)) config_error("unknown key '" + key + "' for experiment '" + experiment + "'");
  cfg[key] = coerce(key, cfg[key], value);
}

// ---------------------------------------------------------------------------
// Output files.

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

class Output {
 public:
  Output(fs::path dir, std::string experiment, Json config)
      : dir_(std::move(dir)), experiment_(std::move(experiment)), config_(std::move(config)) {
    hash_ = config_hash(config_.dump());
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw Error(ErrorCode::io, "cannot create output directory " + dir_.string());
    json("config.json", Json::object());
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::io, "cannot write " + (dir_ / name).string());
    written_.push_back(name);
    return f;
  }

  // CSV with two comment lines carrying the hash and the effective config.
  std::ofstream csv(const std::string& name, const std::vector<std::string>& columns) {
    auto f = open(name);
    f << "# " << experiment_ << " config_hash=" << hash_ << "\n# config=" << config_.dump() << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << "\n";
    return f;
  }

  void json(const std::string& name, Json body) {
    Json doc = {{"experiment", experiment_}, {"config_hash", hash_}, {"config", config_}};
    for (auto& [k, v] : body.items()) doc[k] = v;
    auto f = open(name);
    f << doc.dump(2) << "\n";
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  fs::path dir_;
  std::string experiment_;
  Json config_;
  std::string hash_;
  std::vector<std::string> written_;
};

void row(std::ostream& f, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    f << (first ? "" : ",") << fmt(v);
    first = false;
  }
  f << "\n";
}

// ---------------------------------------------------------------------------
// Shared pieces.

struct Inputs {
  MultiModeState dv;
  MultiModeState hy;
};

Inputs make_inputs(const std::string& kind, double alpha) {
  if (kind == "ideal") return {single_photon_entangled(), hybrid_entangled(alpha)};
  if (kind == "experimental")
    return {experimental_input_dv(InputModelParams::measured_dv()),
            experimental_input_hybrid(InputModelParams::measured_hybrid(), alpha)};
  config_error("inputs must be 'ideal' or 'experimental', got '" + kind + "'");
}

Json state_json(const MultiModeState& s) {
  const auto& m = s.matrix();
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rr = Json::array(), ii = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ii.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return {{"labels", s.labels()}, {"dims", s.dims()}, {"re", re}, {"im", im}};
}

// Frobenius norm of the <0|rho|1> block on the first mode.
double coherence(const MultiModeState& s) {
  const auto dims = s.dims();
  const Eigen::Index rest = s.dim() / dims[0];
  return s.matrix().block(0, rest, rest, rest).norm();
}

// ---------------------------------------------------------------------------

void cmd_fig4(const Json& c, Output& out) {
  const double alpha = num(c, "alpha");
  CurveConfig cfg;
  cfg.loss_db = CurveConfig::grid(num(c, "loss_min_db"), num(c, "loss_max_db"), int(positive(c, "points")));
  cfg.actual = BsmParams{num(c, "r"), num(c, "delta"), num(c, "eta_hd"), num(c, "eta_spd")};
  cfg.eta_d = num(c, "eta_d");
  cfg.fp_fraction = num(c, "fp_fraction");
  cfg.alpha = alpha;
  const auto model = str(c, "direct_model");
  if (model == "dv_link")
    cfg.direct = DirectModel::dv_link;
  else if (model == "symmetric")
    cfg.direct = DirectModel::symmetric;
  else
    config_error("direct_model must be 'dv_link' or 'symmetric'");
  const double km = num(c, "fiber_db_per_km");
  if (!(km > 0)) config_error("fiber_db_per_km must be positive");

  Json summary = Json::object();
  for (const std::string kind : {"ideal", "experimental"}) {
    const auto in = make_inputs(kind, alpha);
    const auto rows = negativity_vs_loss_curve(in.dv, in.hy, cfg);
    auto f = out.csv("fig4_" + kind + "_inputs.csv",
                     {"loss_db", "swap_ideal_bsm", "swap_actual_bsm", "swap_no_conditioning", "swap_darkcounts",
                      "direct"});
    for (const auto& r : rows)
      row(f, {r.loss_db, r.swap_ideal_bsm, r.swap_actual_bsm, r.swap_no_conditioning, r.swap_darkcounts, r.direct});
    Json cross = {{"ideal_bsm", opt(crossover_db(rows, &CurveRow::swap_ideal_bsm))},
                  {"actual_bsm", opt(crossover_db(rows, &CurveRow::swap_actual_bsm))},
                  {"no_conditioning", opt(crossover_db(rows, &CurveRow::swap_no_conditioning))},
                  {"darkcounts", opt(crossover_db(rows, &CurveRow::swap_darkcounts))}};
    // Ideal inputs are compared through the actual BSM, the measured inputs
    // through the curve that also carries dark counts.
    const auto headline = kind == "ideal" ? cross["actual_bsm"] : cross["darkcounts"];
    summary[kind + "_inputs"] = {
        {"crossover_db", cross},
        {"headline_crossover_db", headline},
        {"headline_crossover_km", headline.is_null() ? Json(nullptr) : Json(headline.get<double>() / km)},
        {"zero_loss", {{"swap_actual_bsm", rows.front().swap_actual_bsm}, {"direct", rows.front().direct}}}};
  }
  const auto exp = make_inputs("experimental", alpha);
  summary["measured_point"] = {
      {"fp_fraction", num(c, "measured_fp_fraction")},
      {"eta_d", cfg.eta_d},
      {"negativity", swap_negativity(exp.dv, exp.hy, 0.0, cfg.actual, cfg.eta_d, num(c, "measured_fp_fraction"), alpha)},
      {"negativity_without_fp", swap_negativity(exp.dv, exp.hy, 0.0, cfg.actual, cfg.eta_d, 0.0, alpha)}};
  out.json("fig4_summary.json", summary);
}

void cmd_bsm_sweep(const Json& c, Output& out) {
  const double alpha = num(c, "alpha");
  const auto in = make_inputs(str(c, "inputs"), alpha);
  BsmSweepSpec spec{nums(c, "r_values"), nums(c, "delta_values"), num(c, "eta_hd"), num(c, "eta_spd")};
  BsmSweepSpec lossy = spec;
  lossy.eta_hd = num(c, "lossy_eta_hd");
  lossy.eta_spd = num(c, "lossy_eta_spd");

  Json summary = Json::object();
  auto write = [&](const std::string& name, const BsmSweepSpec& s) {
    const auto rows = sweep_bsm(in.dv, in.hy, s, alpha);
    auto f = out.csv(name, {"r", "delta", "eta_hd", "eta_spd", "efficiency", "fidelity", "purity"});
    double max_eff_at_zero = 0.0;
    for (const auto& r : rows) {
      row(f, {r.r, r.delta, r.eta_hd, r.eta_spd, r.efficiency, r.fidelity, r.purity});
      if (r.delta == 0.0) max_eff_at_zero = std::max(max_eff_at_zero, r.efficiency);
    }
    return max_eff_at_zero;
  };
  summary["max_efficiency_at_zero_window"] = write("bsm_sweep.csv", spec);
  write("bsm_sweep_lossy.csv", lossy);

  const double r0 = num(c, "reference_r"), d0 = num(c, "reference_delta");
  BsmSweepSpec ref{{BsmParams::ideal().r, r0}, {d0}, spec.eta_hd, spec.eta_spd};
  const auto rr = sweep_bsm(in.dv, in.hy, ref, alpha);
  BsmSweepSpec lref{{r0}, {d0}, lossy.eta_hd, lossy.eta_spd};
  const auto lr = sweep_bsm(in.dv, in.hy, lref, alpha);
  summary["reference"] = {{"r", r0},
                          {"delta", d0},
                          {"fidelity_small_r", rr[0].fidelity},
                          {"fidelity", rr[1].fidelity},
                          {"fidelity_drop", rr[0].fidelity - rr[1].fidelity},
                          {"efficiency", rr[1].efficiency},
                          {"purity", rr[1].purity},
                          {"purity_lossy", lr[0].purity}};
  out.json("bsm_sweep_summary.json", summary);
}

void cmd_swap(const Json& c, Output& out) {
  const double alpha = num(c, "alpha");
  const auto in = make_inputs(str(c, "inputs"), alpha);
  const BsmParams bp{num(c, "r"), num(c, "delta"), num(c, "eta_hd"), num(c, "eta_spd")};
  ChannelParams cp;
  cp.eta_d = num(c, "eta_d");
  cp.fp_fraction = num(c, "fp_fraction");
  cp.alpha = alpha;
  const auto swapped = swap_over_channel(in.dv, in.hy, cp, bp);
  if (!swapped.has_events()) throw Error(ErrorCode::numerical, "the BSM never heralds with these parameters");
  const auto without = partial_trace(combine_inputs(in.dv, in.hy), {"A", "D"});

  struct Panel {
    std::string name;
    MultiModeState state;
    std::string dv, cv;  // cv empty for the two-qubit input
  };
  std::vector<Panel> panels = {{"input_dv", in.dv, "A", ""},
                               {"input_hybrid", in.hy, "C", "D"},
                               {"output_bsm", *swapped.state, "A", "D"},
                               {"output_no_bsm", without, "A", "D"}};

  const long long samples = integer(c, "tomography_samples");
  if (samples < 0) config_error("tomography_samples must be >= 0");
  const double extent = num(c, "wigner_extent") * kSigma0;
  const Axis axis{-extent, extent, int(positive(c, "wigner_points"))};
  const auto seed = static_cast<std::uint64_t>(integer(c, "seed"));

  Json report = Json::object();
  for (std::size_t k = 0; k < panels.size(); ++k) {
    auto& p = panels[k];
    Json entry = {{"model_negativity", negativity(p.state, {p.dv})}};
    if (samples > 0) {
      // Two-qubit truncation on DV modes, tomography_dim_cv on CV modes.
      const auto phases = default_phases(int(positive(c, "tomography_phases")));
      const auto labels = p.state.labels();
      const auto joint = sample_joint_quadratures(p.state, phases, phases, per_cell(samples, phases.size() * phases.size()),
                                                  1.0, 1.0, seed + k);
      const int db = p.cv.empty() ? 2 : int(positive(c, "tomography_dim_cv"));
      const auto r = two_mode_mle(joint, 2, db, 1.0, 1.0, {}, {labels[0], labels[1]});
      entry["mle_iterations"] = r.iterations;
      entry["mle_converged"] = r.converged;
      p.state = r.state;
    }
    entry["negativity"] = negativity(p.state, {p.dv});
    entry["purity"] = purity(p.state);
    entry["coherence"] = coherence(p.state);
    entry["state"] = state_json(p.state);
    if (!p.cv.empty()) {
      const auto blocks = hybrid_density_wigner(p.state, p.dv, p.cv, axis, axis);
      auto f = out.csv("swap_" + p.name + "_wigner.csv", {"i", "j", "x", "p", "value"});
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const auto& g = blocks[i][j];
          for (std::size_t ix = 0; ix < g.x.size(); ++ix)
            for (std::size_t ip = 0; ip < g.p.size(); ++ip)
              row(f, {double(i), double(j), g.x[ix], g.p[ip], g.values(Eigen::Index(ix), Eigen::Index(ip))});
        }
    }
    report[p.name] = std::move(entry);
  }
  report["success_probability"] = swapped.success_probability;
  out.json("swap_states.json", report);
}

void cmd_tomography(const Json& c, Output& out) {
  const double alpha = num(c, "alpha");
  const double eff = num(c, "efficiency");
  const auto seed = static_cast<std::uint64_t>(integer(c, "seed"));
  const int cat_dim = int(positive(c, "cat_dim"));
  Json report = Json::object();

  // Single mode: odd cat through loss, reconstructed with and without compensation.
  const auto truth = cat_state({alpha, Parity::odd, cat_dim}, "A");
  const auto phases = default_phases(int(positive(c, "phases")));
  const auto samples =
      sample_quadratures(truth, phases, per_cell(positive(c, "cat_samples"), phases.size()), eff, seed);
  if (flag(c, "write_samples")) {
    auto f = out.csv("tomography_samples.csv", {"phase", "value", "mode"});
    for (const auto& s : samples) f << fmt(s.phase) << "," << fmt(s.value) << "," << s.mode << "\n";
  }
  MleOptions on, off;
  off.compensate = false;
  const auto comp = mle_reconstruct(samples, cat_dim, eff, on);
  const auto raw = mle_reconstruct(samples, cat_dim, eff, off);
  report["cat"] = {{"samples", samples.size()},
                   {"fidelity_compensated", fidelity(comp.state, truth)},
                   {"fidelity_uncompensated", fidelity(raw.state, truth)},
                   {"iterations", comp.iterations},
                   {"converged", comp.converged}};

  // Two modes: a product null and the ideal hybrid state.
  const auto jp = default_phases(int(positive(c, "joint_phases")));
  const std::size_t n_joint = per_cell(positive(c, "joint_samples"), jp.size() * jp.size());
  const auto product = tensor(MultiModeState::from_ket({{"A", 2}}, fock_ket(2, 0)), cat_state({alpha, Parity::even, cat_dim}, "D"));
  const auto pj = sample_joint_quadratures(product, jp, jp, n_joint, 1.0, 1.0, seed + 1);
  const auto pr = two_mode_mle(pj, 2, int(positive(c, "product_dim_b")), 1.0, 1.0);
  report["product_null"] = {{"samples", pj.size()}, {"negativity", negativity(pr.state, {"A"})}};

  // Partition fit on the swapped state, true value from the model.
  const auto swapped = apply_bsm(combine_inputs(single_photon_entangled(3), hybrid_entangled(alpha, 3, cat_dim)),
                                 BsmParams{num(c, "fit_r"), num(c, "fit_delta"), 1.0, 1.0});
  if (!swapped.has_events()) throw Error(ErrorCode::numerical, "fit state: the BSM never heralds");
  const auto target = partial_trace(*swapped.state, {"A", "D"});
  const auto fj = sample_joint_quadratures(target, jp, jp, per_cell(positive(c, "fit_samples"), jp.size() * jp.size()),
                                           1.0, 1.0, seed + 2);
  PartitionOptions po;
  po.divisions.clear();
  for (double d : nums(c, "divisions")) {
    if (d < 1 || std::floor(d) != d) config_error("divisions must be positive integers");
    po.divisions.push_back(int(d));
  }
  po.shuffles = int(positive(c, "shuffles"));
  po.dim_a = 2;
  po.dim_b = int(positive(c, "fit_dim_b"));
  const auto values = partition_log_negativities(fj, po, seed + 3);
  const auto fit = extrapolate_log_negativity(values);
  {
    auto f = out.csv("tomography_partitions.csv", {"size", "log_negativity"});
    for (const auto& v : values) row(f, {double(v.size), v.value});
  }
  Json table = Json::array();
  for (const auto& t : fit.table)
    table.push_back({{"size", t.size}, {"count", t.count}, {"mean", t.mean}, {"stddev", t.stddev}, {"residual", t.residual}});
  const double truth_en = log_negativity(target, {"A"});
  report["fit"] = {{"samples", fj.size()},
                   {"true_log_negativity", truth_en},
                   {"e_infinity", fit.e_infinity},
                   {"e_infinity_stderr", fit.e_infinity_stderr},
                   {"e_infinity_fit_stderr", fit.e_infinity_fit_stderr},
                   {"sampling_stderr", fit.sampling_stderr},
                   {"c", fit.c},
                   {"c_stderr", fit.c_stderr},
                   {"within_two_stderr", std::abs(fit.e_infinity - truth_en) <= 2.0 * fit.e_infinity_stderr},
                   {"table", table}};
  out.json("tomography_report.json", report);
}

TimingConfig timing_config(const Json& c) {
  TimingConfig t;
  t.dt_dl = num(c, "dt_dl");
  t.dt_fiber = num(c, "dt_fiber");
  t.dead_time = num(c, "dead_time");
  t.aom_extinction = num(c, "aom_extinction");
  t.aom_shutoff = num(c, "aom_shutoff");
  t.aom_hold = num(c, "aom_hold");
  t.delay_line_transmission = num(c, "delay_line_transmission");
  t.capture_window = num(c, "capture_window");
  t.filter_window = num(c, "filter_window");
  t.gamma_mhz = num(c, "gamma_mhz");
  t.rate_alpha = num(c, "rate_alpha");
  t.rate_beta = num(c, "rate_beta");
  t.dark_rate = num(c, "dark_rate");
  t.bsm_click_probability = num(c, "bsm_click_probability");
  t.seed = static_cast<std::uint64_t>(integer(c, "seed"));
  try {
    t.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
  return t;
}

Json composition_json(const TriggerComposition& t) {
  return {{"total", t.total},
          {"signal", t.signal},
          {"false_positive", t.false_positive},
          {"dark", t.dark},
          {"signal_fraction", t.signal_fraction()},
          {"false_positive_fraction", t.false_positive_fraction()}};
}

void cmd_events(const Json& c, Output& out) {
  const auto t = timing_config(c);
  const double duration = num(c, "duration_s") * 1e9;
  if (!(duration > 0)) config_error("duration_s must be positive");
  HistogramSpec hs;
  const auto mode = str(c, "trigger");
  if (mode == "shared")
    hs.trigger = TriggerMode::shared;
  else if (mode == "gamma")
    hs.trigger = TriggerMode::gamma;
  else
    config_error("trigger must be 'shared' or 'gamma'");
  hs.window = t.capture_window;
  hs.bin_width = num(c, "hist_bin");

  const auto ev = simulate_streams(t, duration);
  Json summary = Json::object();
  std::map<std::string, std::size_t> by_label;
  std::vector<double> passes(8, 0.0);
  for (const auto& e : ev) {
    ++by_label[to_string(e.detector) + ":" + origin_label(e)];
    if (e.detector == Detector::gamma && e.herald == Detector::alpha && e.passes >= 0 &&
        e.passes < int(passes.size()))
      passes[std::size_t(e.passes)] += 1.0;
  }
  summary["events"] = ev.size();
  summary["counts"] = by_label;
  Json ratios = Json::array();
  for (std::size_t k = 0; k + 1 < passes.size(); ++k)
    ratios.push_back(passes[k] > 0 ? Json(passes[k + 1] / passes[k]) : Json(nullptr));
  summary["echo_ratio_expected"] = t.echo_ratio();
  summary["echo_ratio_measured"] = ratios;

  if (flag(c, "write_events")) {
    auto f = out.csv("events.csv", {"time_ns", "detector", "origin", "source"});
    for (const auto& e : ev) f << fmt(e.time) << "," << to_string(e.detector) << "," << origin_label(e) << "," << e.source << "\n";
  }

  const auto est = estimate_timing(t);
  summary["rate_model"] = {{"shared_rate", est.shared_rate},
                           {"beta_rate", est.beta_rate},
                           {"gamma_rate", est.gamma_rate},
                           {"gamma_signal_rate", est.gamma_signal_rate},
                           {"aom_gated_fraction", est.aom_gated_fraction},
                           {"window_pass", est.window_pass},
                           {"pair_false_positive", est.pair_false_positive},
                           {"pair_dark", est.pair_dark},
                           {"triple_false_positive", est.triple_false_positive},
                           {"triple_dark", est.triple_dark},
                           {"triple_rate_unfiltered", est.triple_rate_unfiltered},
                           {"triple_rate_filtered", est.triple_rate_filtered}};

  CoincidenceHistograms h;
  try {
    h = coincidence_histogram(ev, hs);
  } catch (const Error&) {
    summary["triggers"] = 0;
    out.json("events_summary.json", summary);
    return;
  }
  {
    auto f = out.csv("histograms.csv", {"t_ns", "alpha", "beta"});
    for (std::size_t i = 0; i < h.alpha.counts.size(); ++i) row(f, {h.alpha.center(i), h.alpha.counts[i], h.beta.counts[i]});
  }
  const double center = -t.dt_dl - t.dt_fiber;
  const auto kept = time_filter(h.pairs, center, t.filter_window);
  summary["triggers"] = h.triggers.size();
  summary["alpha_peaks"] = h.alpha_peaks;
  summary["beta_peaks"] = h.beta_peaks;
  summary["filter_center"] = center;
  summary["pairs_unfiltered"] = composition_json(classify_triggers(ev, triggers_with(ev, h.pairs, {Detector::alpha})));
  summary["pairs_filtered"] = composition_json(classify_triggers(ev, triggers_with(ev, kept, {Detector::alpha})));

  const auto unfiltered = triggers_with(ev, h.pairs, {Detector::alpha, Detector::beta});
  const auto filtered = triggers_with(ev, kept, {Detector::alpha, Detector::beta});
  summary["triples_unfiltered"] = composition_json(classify_triggers(ev, unfiltered));
  summary["triples_filtered"] = composition_json(classify_triggers(ev, filtered));

  TraceSpec ts;
  ts.t_min = -t.capture_window;
  ts.bin_width = num(c, "trace_bin");
  ts.seed = t.seed + 1;
  for (const auto& [name, trig] : {std::pair{"unfiltered", &unfiltered}, std::pair{"filtered", &filtered}}) {
    if (trig->empty()) {
      summary[std::string("trace_") + name] = nullptr;
      continue;
    }
    const auto v = variance_trace(ev, *trig, t, ts);
    auto f = out.csv(std::string("variance_trace_") + name + ".csv", {"t_ns", "cv", "dv"});
    for (std::size_t i = 0; i < v.t.size(); ++i) row(f, {v.t[i], v.cv[i], v.dv[i]});
    summary[std::string("trace_") + name] = {{"triggers", v.triggers}, {"cv_peaks", v.cv_peaks}, {"dv_peaks", v.dv_peaks}};
  }
  out.json("events_summary.json", summary);
}

// ---------------------------------------------------------------------------

struct Experiment {
  const char* name;
  Json (*defaults)();
  void (*run)(const Json&, Output&);
};

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r = {
      {"fig4", fig4_defaults, cmd_fig4},
      {"bsm-sweep", bsm_sweep_defaults, cmd_bsm_sweep},
      {"swap", swap_defaults, cmd_swap},
      {"tomography", tomography_defaults, cmd_tomography},
      {"events", events_defaults, cmd_events},
  };
  return r;
}

const Experiment& find(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return e;
  config_error("unknown experiment '" + name + "'");
}

Json resolve(const Experiment& e, const RunOptions& opts) {
  Json cfg = e.defaults();
  if (opts.config_path) {
    std::ifstream f(*opts.config_path);
    if (!f) config_error("cannot read config file " + *opts.config_path);
    Json file;
    try {
      file = Json::parse(f);
    } catch (const Json::parse_error& err) {
      config_error(std::string("config file is not valid JSON: ") + err.what());
    }
    if (!file.is_object()) config_error("config file must hold a JSON object");
    for (auto& [k, v] : file.items()) apply(cfg, k, v, e.name);
  }
  for (const auto& s : opts.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) config_error("--set expects key=value, got '" + s + "'");
    const std::string key = s.substr(0, eq), text = s.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    apply(cfg, key, value, e.name);
  }
  if (opts.seed) cfg["seed"] = static_cast<long long>(*opts.seed);
  if (integer(cfg, "seed") < 0) config_error("seed must be >= 0");
  return cfg;
}

}  // namespace

std::vector<std::string> experiments() {
  std::vector<std::string> out;
  for (const auto& e : registry()) out.emplace_back(e.name);
  return out;
}

std::string default_config(const std::string& experiment) { return find(experiment).defaults().dump(2); }

std::string resolve_config(const std::string& experiment, const RunOptions& opts) {
  return resolve(find(experiment), opts).dump(2);
}

std::string config_hash(const std::string& config_json) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_json) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

int run(const std::string& experiment, const RunOptions& opts, std::ostream& log) {
  try {
    const auto& e = find(experiment);
    const Json cfg = resolve(e, opts);
    Output out(opts.out_dir, e.name, cfg);
    e.run(cfg, out);
    log << e.name << ": wrote";
    for (const auto& f : out.written()) log << " " << f;
    log << " to " << opts.out_dir << "\n";
    return kExitOk;
  } catch (const Error& err) {
    log << "error: " << err.what() << "\n";
    switch (err.code()) {
      case ErrorCode::numerical:
      case ErrorCode::truncation:
        return kExitNumerical;
      default:
        return kExitConfig;
    }
  } catch (const nlohmann::json::exception& err) {
    log << "error: config: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    log << "error: numerical: " << err.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace hybridswap::cli
