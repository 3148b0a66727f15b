#pragma once

// Truncated Fock-space linear algebra over labelled bosonic modes.
//
// Conventions used throughout the library:
//   * quadrature x = (a + a^dagger) / sqrt(2), so the vacuum variance is 1/2
//     and sigma0 = 1/sqrt(2);
//   * register order is Kronecker order, the first mode is the most
//     significant index;
//   * beamsplitter on (m1, m2) with transmission T maps
//       a1^dagger -> sqrt(T) a1^dagger + sqrt(1-T) a2^dagger,
//       a2^dagger -> sqrt(T) a2^dagger - sqrt(1-T) a1^dagger,
//     which is real and reproduces the sign pattern of the combined
//     four-mode state used by the swap. Swapping the mode arguments inverts it.

#include <complex>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hybridswap {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double kSigma0 = 0.70710678118654752440;  // sqrt(1/2)
inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ModeSpec {
  std::string label;
  int dim = 2;

  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

enum class NormPolicy { normalized, unnormalized };

/// Density matrix over an ordered register of truncated modes.
///
/// Immutable once built. Construction checks the register (unique labels,
/// dim >= 2, matching matrix size), Hermiticity and, for normalized states,
/// unit trace. Positivity is checked on demand by check_state() because it
/// needs a full eigendecomposition.
class MultiModeState {
 public:
  MultiModeState(std::vector<ModeSpec> modes, Matrix rho,
                 NormPolicy policy = NormPolicy::normalized);

  static MultiModeState from_ket(std::vector<ModeSpec> modes, const Vector& ket,
                                 NormPolicy policy = NormPolicy::normalized);

  const std::vector<ModeSpec>& modes() const noexcept { return modes_; }
  const Matrix& matrix() const noexcept { return rho_; }
  NormPolicy norm_policy() const noexcept { return policy_; }

  Eigen::Index dim() const noexcept { return rho_.rows(); }
  std::vector<int> dims() const;
  std::vector<std::string> labels() const;
  double trace() const { return rho_.trace().real(); }

  bool has_mode(std::string_view label) const noexcept;
  std::size_t index_of(std::string_view label) const;

  /// Divide by the trace. Throws ErrorCode::numerical for a vanishing trace.
  MultiModeState normalized() const;
  MultiModeState relabeled(const std::vector<std::string>& labels) const;

 private:
  std::vector<ModeSpec> modes_;
  Matrix rho_;
  NormPolicy policy_;
};

struct StateCheck {
  double hermiticity_error = 0.0;  // max |rho - rho^dagger|
  double min_eigenvalue = 0.0;
  double trace = 0.0;
};

StateCheck check_state(const MultiModeState& s);

MultiModeState tensor(const MultiModeState& a, const MultiModeState& b);

Matrix beamsplitter_unitary(int dim1, int dim2, double transmission);

MultiModeState apply_beamsplitter(const MultiModeState& s, std::string_view m1,
                                  std::string_view m2, double transmission);

/// Reduced state on `keep`, in the order given by `keep`.
MultiModeState partial_trace(const MultiModeState& s, const std::vector<std::string>& keep);

/// Partial transpose over the listed modes. The result is Hermitian but not a
/// state, so it is returned as a bare matrix in the original register order.
Matrix partial_transpose(const MultiModeState& s, const std::vector<std::string>& modes);

/// rho -> O rho O^dagger with O acting on `targets` (Kronecker order of the
/// target list). The result is unnormalized unless O is unitary.
MultiModeState apply_operator(const MultiModeState& s, const std::vector<std::string>& targets,
                              const Matrix& op);

/// rho -> sum_k w_k K_k rho K_k^dagger on a single mode. Weights default to 1.
MultiModeState apply_kraus(const MultiModeState& s, std::string_view mode,
                           std::span<const Matrix> kraus, std::span<const double> weights = {});

Matrix annihilation(int dim);
Vector fock_ket(int dim, int n);

/// Kraus operators of a pure-loss (amplitude damping) channel with
/// transmission eta; element k removes k photons.
std::vector<Matrix> loss_kraus(int dim, double eta);

// ---------------------------------------------------------------------------
// Quadrature wavefunctions and the homodyne conditioning window.

/// psi_0(x) .. psi_{count-1}(x) through the three-term recurrence.
std::vector<double> hermite_functions(int count, double x);

struct HomodyneWindowOp {
  double delta = 0.0;  // full window width in units of sigma0
  RealMatrix matrix;   // A_ij = int_{-delta/2}^{delta/2} psi_i psi_j dx, limits in x units
};

/// delta > 0, or kInfinity for the identity (no conditioning).
HomodyneWindowOp homodyne_window(double delta, int dim);

/// Direction of A^delta / delta as delta -> 0+: proportional to psi_i(0) psi_j(0).
RealMatrix homodyne_window_zero_limit(int dim);

/// Tr_mode(A rho) for a real symmetric window A on `mode`; the mode is removed.
MultiModeState condition_on_window(const MultiModeState& s, std::string_view mode,
                                   const RealMatrix& window);

}  // namespace hybridswap
