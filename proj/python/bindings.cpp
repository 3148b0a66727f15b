#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "hybridswap/bsm.hpp"
#include "hybridswap/channel.hpp"
#include "hybridswap/cli.hpp"
#include "hybridswap/error.hpp"
#include "hybridswap/metrics.hpp"
#include "hybridswap/states.hpp"
#include "hybridswap/timing.hpp"
#include "hybridswap/tomography.hpp"

namespace py = pybind11;
using namespace hybridswap;

namespace {

std::vector<ModeSpec> to_modes(const std::vector<std::pair<std::string, int>>& m) {
  std::vector<ModeSpec> out;
  for (const auto& [label, dim] : m) out.push_back({label, dim});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fock-space entanglement swapping models";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "Error", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto& type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("code") = to_string(e.code());
      py::set_error(type, exc);
    }
  });

  m.attr("SIGMA0") = kSigma0;
  m.attr("DEFAULT_ALPHA") = kDefaultAlpha;
  m.attr("DEFAULT_CV_DIM") = kDefaultCvDim;
  m.attr("DEFAULT_DV_DIM") = kDefaultDvDim;

  py::class_<MultiModeState>(m, "MultiModeState")
      .def(py::init([](const std::vector<std::pair<std::string, int>>& modes, const Matrix& rho, bool normalized) {
             return MultiModeState(to_modes(modes), rho,
                                   normalized ? NormPolicy::normalized : NormPolicy::unnormalized);
           }),
           py::arg("modes"), py::arg("rho"), py::arg("normalized") = true)
      .def_static(
          "from_ket",
          [](const std::vector<std::pair<std::string, int>>& modes, const Vector& ket) {
            return MultiModeState::from_ket(to_modes(modes), ket);
          },
          py::arg("modes"), py::arg("ket"))
      .def_property_readonly("matrix", &MultiModeState::matrix)
      .def_property_readonly("dims", &MultiModeState::dims)
      .def_property_readonly("labels", &MultiModeState::labels)
      .def("trace", &MultiModeState::trace)
      .def("normalized", &MultiModeState::normalized)
      .def("relabeled", &MultiModeState::relabeled)
      .def("__repr__", [](const MultiModeState& s) {
        std::ostringstream o;
        o << "<MultiModeState";
        for (const auto& md : s.modes()) o << ' ' << md.label << ':' << md.dim;
        o << '>';
        return o.str();
      });

  m.def("tensor", &tensor);
  m.def("partial_trace", &partial_trace, py::arg("state"), py::arg("keep"));
  m.def("partial_transpose", &partial_transpose, py::arg("state"), py::arg("modes"));
  m.def("apply_beamsplitter", &apply_beamsplitter, py::arg("state"), py::arg("m1"), py::arg("m2"),
        py::arg("transmission"));
  m.def("annihilation", &annihilation);
  m.def("fock_ket", &fock_ket, py::arg("dim"), py::arg("n"));
  m.def("homodyne_window", [](double delta, int dim) { return homodyne_window(delta, dim).matrix; },
        py::arg("delta"), py::arg("dim"));

  m.def("cat_state",
        [](double alpha, bool odd, int dim, const std::string& label) {
          return cat_state({alpha, odd ? Parity::odd : Parity::even, dim}, label);
        },
        py::arg("alpha") = kDefaultAlpha, py::arg("odd") = false, py::arg("dim") = kDefaultCvDim,
        py::arg("label") = "D");
  m.def("single_photon_entangled", &single_photon_entangled, py::arg("dv_dim") = kDefaultDvDim,
        py::arg("a") = "A", py::arg("b") = "B");
  m.def("hybrid_entangled", &hybrid_entangled, py::arg("alpha") = kDefaultAlpha,
        py::arg("dv_dim") = kDefaultDvDim, py::arg("cv_dim") = kDefaultCvDim, py::arg("c") = "C",
        py::arg("d") = "D");
  m.def("experimental_input_dv",
        [](double cg, double cm, double cv, int dv_dim) {
          return experimental_input_dv({cg, cm, cv}, dv_dim);
        },
        py::arg("cg") = 1.0, py::arg("cm") = 0.05, py::arg("cv") = 0.97, py::arg("dv_dim") = kDefaultDvDim);
  m.def("experimental_input_hybrid",
        [](double cg, double cm, double cv, double alpha, int dv_dim, int cv_dim) {
          return experimental_input_hybrid({cg, cm, cv}, alpha, dv_dim, cv_dim);
        },
        py::arg("cg") = 1.0, py::arg("cm") = 0.047, py::arg("cv") = 0.438, py::arg("alpha") = kDefaultAlpha,
        py::arg("dv_dim") = kDefaultDvDim, py::arg("cv_dim") = kDefaultCvDim);

  m.def("negativity", &negativity, py::arg("state"), py::arg("side"));
  m.def("log_negativity", &log_negativity, py::arg("state"), py::arg("side"));
  m.def("fidelity", &fidelity);
  m.def("purity", &purity);

  py::class_<BsmParams>(m, "BsmParams")
      .def(py::init([](double r, double delta, double eta_hd, double eta_spd) {
             return BsmParams{r, delta, eta_hd, eta_spd};
           }),
           py::arg("r") = 0.10, py::arg("delta") = 1.0, py::arg("eta_hd") = 1.0, py::arg("eta_spd") = 1.0)
      .def_readwrite("r", &BsmParams::r)
      .def_readwrite("delta", &BsmParams::delta)
      .def_readwrite("eta_hd", &BsmParams::eta_hd)
      .def_readwrite("eta_spd", &BsmParams::eta_spd);

  py::class_<BsmOutcome>(m, "BsmOutcome")
      .def_readonly("state", &BsmOutcome::state)
      .def_readonly("success_probability", &BsmOutcome::success_probability);

  m.def("combine_inputs", &combine_inputs);
  m.def("apply_bsm", &apply_bsm);
  m.def("swap_target", &swap_target, py::arg("alpha") = kDefaultAlpha, py::arg("dv_dim") = kDefaultDvDim,
        py::arg("cv_dim") = kDefaultCvDim);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init([](double eta_b, double eta_c, double eta_d, double fp, double alpha) {
             return ChannelParams{eta_b, eta_c, eta_d, fp, alpha};
           }),
           py::arg("eta_b") = 1.0, py::arg("eta_c") = 1.0, py::arg("eta_d") = 0.0, py::arg("fp_fraction") = 0.0,
           py::arg("alpha") = kDefaultAlpha)
      .def_readwrite("eta_b", &ChannelParams::eta_b)
      .def_readwrite("eta_c", &ChannelParams::eta_c)
      .def_readwrite("eta_d", &ChannelParams::eta_d)
      .def_readwrite("fp_fraction", &ChannelParams::fp_fraction)
      .def_readwrite("alpha", &ChannelParams::alpha);

  m.def("apply_loss", &apply_loss, py::arg("state"), py::arg("mode"), py::arg("eta"));
  m.def("swap_over_channel", &swap_over_channel);
  m.def("direct_propagation_negativity",
        [](const MultiModeState& hy, double eta, bool symmetric) {
          return direct_propagation_negativity(hy, eta, symmetric ? DirectModel::symmetric : DirectModel::dv_link);
        },
        py::arg("hybrid"), py::arg("eta"), py::arg("symmetric") = false);
  m.def("db_to_transmission", &db_to_transmission);

  py::class_<MleResult>(m, "MleResult")
      .def_readonly("state", &MleResult::state)
      .def_readonly("iterations", &MleResult::iterations)
      .def_readonly("converged", &MleResult::converged)
      .def_readonly("log_likelihood", &MleResult::log_likelihood);

  // Quadrature data cross the boundary as (phases, values) lists.
  m.def("sample_quadratures",
        [](const MultiModeState& s, const std::vector<double>& phases, std::size_t n, double eff, std::uint64_t seed) {
          const auto smp = sample_quadratures(s, phases, n, eff, seed);
          std::vector<double> ph, val;
          for (const auto& q : smp) {
            ph.push_back(q.phase);
            val.push_back(q.value);
          }
          return std::make_pair(ph, val);
        },
        py::arg("state"), py::arg("phases"), py::arg("n_per_phase"), py::arg("efficiency") = 1.0,
        py::arg("seed") = 1);
  m.def("mle_reconstruct",
        [](const std::vector<double>& phases, const std::vector<double>& values, int dim, double eff,
           bool compensate) {
          if (phases.size() != values.size()) throw Error(ErrorCode::invalid_argument, "length mismatch");
          std::vector<QuadratureSample> smp;
          for (std::size_t i = 0; i < phases.size(); ++i) smp.push_back({phases[i], values[i], "A"});
          MleOptions o;
          o.compensate = compensate;
          return mle_reconstruct(smp, dim, eff, o);
        },
        py::arg("phases"), py::arg("values"), py::arg("dim"), py::arg("efficiency") = 1.0,
        py::arg("compensate") = true);
  m.def("default_phases", &default_phases, py::arg("n") = 12);

  m.def("extrapolate_log_negativity",
        [](const std::vector<std::size_t>& sizes, const std::vector<double>& values) {
          if (sizes.size() != values.size()) throw Error(ErrorCode::invalid_argument, "length mismatch");
          std::vector<PartitionValue> pv;
          for (std::size_t i = 0; i < sizes.size(); ++i) pv.push_back({sizes[i], values[i]});
          const auto f = extrapolate_log_negativity(pv);
          py::dict d;
          d["e_infinity"] = f.e_infinity;
          d["e_infinity_stderr"] = f.e_infinity_stderr;
          d["e_infinity_fit_stderr"] = f.e_infinity_fit_stderr;
          d["sampling_stderr"] = f.sampling_stderr;
          d["c"] = f.c;
          d["c_stderr"] = f.c_stderr;
          return d;
        },
        py::arg("sizes"), py::arg("values"));

  py::class_<TimingEstimate>(m, "TimingEstimate")
      .def_readonly("pair_false_positive", &TimingEstimate::pair_false_positive)
      .def_readonly("triple_false_positive", &TimingEstimate::triple_false_positive)
      .def_readonly("triple_rate_filtered", &TimingEstimate::triple_rate_filtered)
      .def_readonly("triple_rate_unfiltered", &TimingEstimate::triple_rate_unfiltered);
  m.def("estimate_timing", [](std::uint64_t seed) {
    TimingConfig c;
    c.seed = seed;
    return estimate_timing(c);
  }, py::arg("seed") = 1);

  m.def("experiments", &cli::experiments);
  m.def("default_config", &cli::default_config);
  m.def("config_hash", &cli::config_hash);
  m.def("run_experiment",
        [](const std::string& name, const std::string& out_dir, const std::vector<std::string>& sets,
           std::optional<std::uint64_t> seed) {
          cli::RunOptions o;
          o.out_dir = out_dir;
          o.sets = sets;
          o.seed = seed;
          std::ostringstream log;
          const int code = cli::run(name, o, log);
          return std::make_pair(code, log.str());
        },
        py::arg("name"), py::arg("out_dir"), py::arg("sets") = std::vector<std::string>{},
        py::arg("seed") = std::nullopt);
}
