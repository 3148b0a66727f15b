#include "hybridswap/states.hpp"

#include <cmath>

#include "hybridswap/error.hpp"

namespace hybridswap {
namespace {

constexpr double kCatTailTol = 1e-8;

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

// Population of the untruncated cat above the cut, from the closed-form norm.
double cat_tail(double alpha, Parity parity, int dim) {
  const double a2 = alpha * alpha;
  const int sign = parity == Parity::even ? 1 : -1;
  const double norm = 1.0 + sign * std::exp(-2.0 * a2);
  double kept = 0.0;
  double term = std::exp(-a2);  // e^{-a^2} a^{2n} / n!
  for (int n = 0; n < dim; ++n) {
    if ((n % 2 == 0) == (parity == Parity::even)) kept += 2.0 * term;
    term *= a2 / (n + 1);
  }
  return std::max(0.0, 1.0 - kept / norm);
}

InputModelParams normalized_weights(const InputModelParams& p) {
  if (p.cg < 0 || p.cm < 0 || p.cv < 0)
    throw Error(ErrorCode::invalid_argument, "mixture weights must be non-negative");
  const double total = p.cg + p.cm + p.cv;
  if (total <= 0) throw Error(ErrorCode::invalid_argument, "mixture weights are all zero");
  return {p.cg / total, p.cm / total, p.cv / total};
}

Matrix proj(const Vector& v) { return v * v.adjoint(); }

}  // namespace

Vector coherent_ket(Complex alpha, int dim) {
  Vector v(dim);
  Complex amp = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < dim; ++n) {
    v(n) = amp;
    amp *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return v;
}

Vector cat_ket(const CatSpec& spec) {
  if (!(spec.alpha >= 0.0)) throw Error(ErrorCode::invalid_argument, "cat amplitude must be >= 0");
  if (spec.dim < 2) throw Error(ErrorCode::invalid_argument, "cat truncation must be >= 2");
  if (spec.parity == Parity::odd && spec.alpha == 0.0)
    throw Error(ErrorCode::invalid_argument, "odd cat is undefined at alpha = 0");
  const double tail = cat_tail(spec.alpha, spec.parity, spec.dim);
  if (tail > kCatTailTol)
    throw Error(ErrorCode::truncation, "truncation " + std::to_string(spec.dim) + " leaves " +
                                           std::to_string(tail) + " of the cat population above the cut");
  const double sign = spec.parity == Parity::even ? 1.0 : -1.0;
  Vector v = coherent_ket(spec.alpha, spec.dim) + sign * coherent_ket(-spec.alpha, spec.dim);
  return v / v.norm();
}

MultiModeState cat_state(const CatSpec& spec, const std::string& label) {
  return MultiModeState::from_ket({{label, spec.dim}}, cat_ket(spec));
}

MultiModeState single_photon_entangled(int dv_dim, const std::string& a, const std::string& b) {
  const Vector psi = (kron(fock_ket(dv_dim, 0), fock_ket(dv_dim, 1)) + kron(fock_ket(dv_dim, 1), fock_ket(dv_dim, 0))) /
                     std::sqrt(2.0);
  return MultiModeState::from_ket({{a, dv_dim}, {b, dv_dim}}, psi);
}

MultiModeState hybrid_entangled(double alpha, int dv_dim, int cv_dim, const std::string& c, const std::string& d) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "hybrid state needs alpha > 0");
  const Vector plus = cat_ket({alpha, Parity::even, cv_dim});
  const Vector minus = cat_ket({alpha, Parity::odd, cv_dim});
  const Vector psi = (kron(fock_ket(dv_dim, 0), minus) + kron(fock_ket(dv_dim, 1), plus)) / std::sqrt(2.0);
  return MultiModeState::from_ket({{c, dv_dim}, {d, cv_dim}}, psi);
}

MultiModeState experimental_input_dv(const InputModelParams& p, int dv_dim, const std::string& a,
                                     const std::string& b) {
  const auto w = normalized_weights(p);
  const Vector k01 = kron(fock_ket(dv_dim, 0), fock_ket(dv_dim, 1));
  const Vector k10 = kron(fock_ket(dv_dim, 1), fock_ket(dv_dim, 0));
  const Vector k00 = kron(fock_ket(dv_dim, 0), fock_ket(dv_dim, 0));
  const Vector phi = (k01 + k10) / std::sqrt(2.0);
  const Matrix rho = w.cg * proj(phi) + 0.5 * w.cm * (proj(k01) + proj(k10)) + w.cv * proj(k00);
  return MultiModeState({{a, dv_dim}, {b, dv_dim}}, rho);
}

MultiModeState experimental_input_hybrid(const InputModelParams& p, double alpha, int dv_dim, int cv_dim,
                                         const std::string& c, const std::string& d) {
  const auto w = normalized_weights(p);
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "hybrid state needs alpha > 0");
  const Vector plus = cat_ket({alpha, Parity::even, cv_dim});
  const Vector minus = cat_ket({alpha, Parity::odd, cv_dim});
  const Vector k0m = kron(fock_ket(dv_dim, 0), minus);
  const Vector k1p = kron(fock_ket(dv_dim, 1), plus);
  const Vector k0p = kron(fock_ket(dv_dim, 0), plus);
  const Vector phi = (k0m + k1p) / std::sqrt(2.0);
  const Matrix rho = w.cg * proj(phi) + 0.5 * w.cm * (proj(k0m) + proj(k1p)) + w.cv * proj(k0p);
  return MultiModeState({{c, dv_dim}, {d, cv_dim}}, rho);
}

MultiModeState vacuum_even_cat(double alpha, int dv_dim, int cv_dim, const std::string& dv, const std::string& cv) {
  const Vector v = kron(fock_ket(dv_dim, 0), cat_ket({alpha, Parity::even, cv_dim}));
  return MultiModeState::from_ket({{dv, dv_dim}, {cv, cv_dim}}, v);
}

}  // namespace hybridswap
