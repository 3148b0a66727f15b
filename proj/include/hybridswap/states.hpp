#pragma once

// Ideal and mixture-model input states. DV modes hold photon-number qubits
// (truncated at 3 levels by default so two-photon terms survive the
// beamsplitter), CV modes hold cat states.

#include <string>

#include "hybridswap/fock.hpp"

namespace hybridswap {

inline constexpr double kDefaultAlpha = 0.9;
inline constexpr int kDefaultCvDim = 12;
inline constexpr int kDefaultDvDim = 3;

enum class Parity { even, odd };

struct CatSpec {
  double alpha = kDefaultAlpha;
  Parity parity = Parity::even;
  int dim = kDefaultCvDim;
};

/// Relative weights of the entangled, dephased and vacuum-like terms.
struct InputModelParams {
  double cg = 1.0;
  double cm = 0.0;
  double cv = 0.0;

  static InputModelParams measured_dv() { return {1.0, 0.05, 0.97}; }
  static InputModelParams measured_hybrid() { return {1.0, 0.047, 0.438}; }
};

/// Truncated coherent-state amplitudes e^{-a^2/2} a^n / sqrt(n!), not renormalized.
Vector coherent_ket(Complex alpha, int dim);

/// Normalized |alpha> +/- |-alpha>. Throws ErrorCode::truncation when more than
/// 1e-8 of the untruncated population lies above the cut.
Vector cat_ket(const CatSpec& spec);
MultiModeState cat_state(const CatSpec& spec, const std::string& label = "D");

/// (|0,1> + |1,0>)/sqrt(2) on (A, B).
MultiModeState single_photon_entangled(int dv_dim = kDefaultDvDim, const std::string& a = "A",
                                       const std::string& b = "B");

/// (|0>|cat_-> + |1>|cat_+>)/sqrt(2) on (C, D).
MultiModeState hybrid_entangled(double alpha = kDefaultAlpha, int dv_dim = kDefaultDvDim,
                                int cv_dim = kDefaultCvDim, const std::string& c = "C",
                                const std::string& d = "D");

/// cg |Phi1><Phi1| + cm/2 (|0,1><0,1| + |1,0><1,0|) + cv |0,0><0,0|, normalized.
MultiModeState experimental_input_dv(const InputModelParams& p, int dv_dim = kDefaultDvDim,
                                     const std::string& a = "A", const std::string& b = "B");

/// cg |Phi2><Phi2| + cm/2 (|0,cat_-><..| + |1,cat_+><..|) + cv |0,cat_+><0,cat_+|, normalized.
/// The vacuum-like term keeps the even cat on the CV mode.
MultiModeState experimental_input_hybrid(const InputModelParams& p, double alpha = kDefaultAlpha,
                                         int dv_dim = kDefaultDvDim, int cv_dim = kDefaultCvDim,
                                         const std::string& c = "C", const std::string& d = "D");

/// |0>|cat_+> on a DV/CV pair; the admixture used for false positives and dark counts.
MultiModeState vacuum_even_cat(double alpha, int dv_dim, int cv_dim, const std::string& dv = "A",
                               const std::string& cv = "D");

}  // namespace hybridswap
