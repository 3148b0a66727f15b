#include "hybridswap/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hybridswap/error.hpp"

namespace hybridswap {
namespace {

using Index = Eigen::Index;

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-9;

std::vector<Index> strides_of(const std::vector<int>& dims) {
  std::vector<Index> strides(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
  return strides;
}

// Offsets of every configuration of the `targets` digits (first target most
// significant) and the base indices whose target digits are all zero.
struct Layout {
  std::vector<Index> offsets;
  std::vector<Index> bases;
};

Layout make_layout(const std::vector<int>& dims, const std::vector<std::size_t>& targets) {
  const auto strides = strides_of(dims);
  Layout layout;
  layout.offsets = {0};
  for (std::size_t t : targets) {
    std::vector<Index> next;
    next.reserve(layout.offsets.size() * dims[t]);
    for (Index off : layout.offsets)
      for (int d = 0; d < dims[t]; ++d) next.push_back(off + d * strides[t]);
    layout.offsets = std::move(next);
  }
  std::vector<bool> is_target(dims.size(), false);
  for (std::size_t t : targets) is_target[t] = true;
  layout.bases = {0};
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (is_target[k]) continue;
    std::vector<Index> next;
    next.reserve(layout.bases.size() * dims[k]);
    for (Index b : layout.bases)
      for (int d = 0; d < dims[k]; ++d) next.push_back(b + d * strides[k]);
    layout.bases = std::move(next);
  }
  return layout;
}

// out = L rho R^dagger, L and R acting on the layout's target subspace.
Matrix sandwich(const Matrix& rho, const Layout& layout, const Matrix& left, const Matrix& right) {
  const Index n = rho.rows();
  const Index t = static_cast<Index>(layout.offsets.size());
  Matrix tmp = Matrix::Zero(n, n);
  Vector gathered(t);
  for (Index col = 0; col < n; ++col) {
    for (Index base : layout.bases) {
      bool any = false;
      for (Index i = 0; i < t; ++i) {
        gathered(i) = rho(base + layout.offsets[i], col);
        any = any || gathered(i) != Complex(0.0);
      }
      if (!any) continue;
      for (Index i = 0; i < t; ++i) {
        Complex acc = 0.0;
        for (Index j = 0; j < t; ++j) acc += left(i, j) * gathered(j);
        tmp(base + layout.offsets[i], col) = acc;
      }
    }
  }
  Matrix out = Matrix::Zero(n, n);
  const Matrix right_conj = right.conjugate();
  for (Index row = 0; row < n; ++row) {
    for (Index base : layout.bases) {
      bool any = false;
      for (Index i = 0; i < t; ++i) {
        gathered(i) = tmp(row, base + layout.offsets[i]);
        any = any || gathered(i) != Complex(0.0);
      }
      if (!any) continue;
      for (Index i = 0; i < t; ++i) {
        Complex acc = 0.0;
        for (Index j = 0; j < t; ++j) acc += gathered(j) * right_conj(i, j);
        out(row, base + layout.offsets[i]) = acc;
      }
    }
  }
  return out;
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

std::vector<std::size_t> indices_of(const MultiModeState& s, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const std::size_t idx = s.index_of(l);
    if (std::find(out.begin(), out.end(), idx) != out.end())
      throw Error(ErrorCode::label, "mode '" + l + "' listed twice");
    out.push_back(idx);
  }
  return out;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

// ---------------------------------------------------------------------------

MultiModeState::MultiModeState(std::vector<ModeSpec> modes, Matrix rho, NormPolicy policy)
    : modes_(std::move(modes)), rho_(std::move(rho)), policy_(policy) {
  if (modes_.empty()) throw Error(ErrorCode::invalid_argument, "state needs at least one mode");
  std::unordered_set<std::string> seen;
  Index expected = 1;
  for (const auto& m : modes_) {
    if (m.dim < 2) throw Error(ErrorCode::invalid_argument, "mode '" + m.label + "' has dim < 2");
    if (!seen.insert(m.label).second)
      throw Error(ErrorCode::label, "duplicate mode label '" + m.label + "'");
    expected *= m.dim;
  }
  if (rho_.rows() != expected || rho_.cols() != expected)
    throw Error(ErrorCode::invalid_argument,
                "matrix size " + std::to_string(rho_.rows()) + "x" + std::to_string(rho_.cols()) +
                    " does not match register dimension " + std::to_string(expected));
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol)
    throw Error(ErrorCode::numerical, "matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  if (policy_ == NormPolicy::normalized && std::abs(trace() - 1.0) > kTraceTol)
    throw Error(ErrorCode::numerical, "normalized state has trace " + std::to_string(trace()));
}

MultiModeState MultiModeState::from_ket(std::vector<ModeSpec> modes, const Vector& ket,
                                        NormPolicy policy) {
  return MultiModeState(std::move(modes), ket * ket.adjoint(), policy);
}

std::vector<int> MultiModeState::dims() const {
  std::vector<int> out;
  out.reserve(modes_.size());
  for (const auto& m : modes_) out.push_back(m.dim);
  return out;
}

std::vector<std::string> MultiModeState::labels() const {
  std::vector<std::string> out;
  out.reserve(modes_.size());
  for (const auto& m : modes_) out.push_back(m.label);
  return out;
}

bool MultiModeState::has_mode(std::string_view label) const noexcept {
  return std::any_of(modes_.begin(), modes_.end(), [&](const ModeSpec& m) { return m.label == label; });
}

std::size_t MultiModeState::index_of(std::string_view label) const {
  for (std::size_t k = 0; k < modes_.size(); ++k)
    if (modes_[k].label == label) return k;
  throw Error(ErrorCode::label, "unknown mode label '" + std::string(label) + "'");
}

MultiModeState MultiModeState::normalized() const {
  const double tr = trace();
  if (!(tr > 0.0) || !std::isfinite(tr))
    throw Error(ErrorCode::numerical, "cannot normalize a state with trace " + std::to_string(tr));
  return MultiModeState(modes_, rho_ / tr, NormPolicy::normalized);
}

MultiModeState MultiModeState::relabeled(const std::vector<std::string>& labels) const {
  if (labels.size() != modes_.size())
    throw Error(ErrorCode::label, "relabel needs one label per mode");
  auto modes = modes_;
  for (std::size_t k = 0; k < modes.size(); ++k) modes[k].label = labels[k];
  return MultiModeState(std::move(modes), rho_, policy_);
}

StateCheck check_state(const MultiModeState& s) {
  StateCheck out;
  out.hermiticity_error = (s.matrix() - s.matrix().adjoint()).cwiseAbs().maxCoeff();
  out.trace = s.trace();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian_part(s.matrix()), Eigen::EigenvaluesOnly);
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  return out;
}

MultiModeState tensor(const MultiModeState& a, const MultiModeState& b) {
  for (const auto& m : b.modes())
    if (a.has_mode(m.label)) throw Error(ErrorCode::label, "tensor: duplicate mode label '" + m.label + "'");
  auto modes = a.modes();
  modes.insert(modes.end(), b.modes().begin(), b.modes().end());
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  Matrix k(x.rows() * y.rows(), x.cols() * y.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j) k.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
  const bool both_normalized =
      a.norm_policy() == NormPolicy::normalized && b.norm_policy() == NormPolicy::normalized;
  return MultiModeState(std::move(modes), std::move(k),
                        both_normalized ? NormPolicy::normalized : NormPolicy::unnormalized);
}

Matrix beamsplitter_unitary(int dim1, int dim2, double transmission) {
  if (!(transmission >= 0.0 && transmission <= 1.0))
    throw Error(ErrorCode::invalid_argument, "beamsplitter transmission must lie in [0,1]");
  const Matrix a = annihilation(dim1);
  const Matrix b = annihilation(dim2);
  const Matrix id1 = Matrix::Identity(dim1, dim1);
  const Matrix id2 = Matrix::Identity(dim2, dim2);
  auto kron = [](const Matrix& x, const Matrix& y) {
    Matrix k(x.rows() * y.rows(), x.cols() * y.cols());
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) k.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return k;
  };
  const Matrix a1 = kron(a, id2);
  const Matrix a2 = kron(id1, b);
  // G = a2^dagger a1 - a1^dagger a2 ; U = exp(theta G) with cos(theta) = sqrt(T).
  const Matrix generator = a2.adjoint() * a1 - a1.adjoint() * a2;
  const Matrix hermitian = Complex(0.0, 1.0) * generator;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hermitian);
  const double theta = std::acos(std::sqrt(transmission));
  Vector phases(eig.eigenvalues().size());
  for (Index i = 0; i < phases.size(); ++i)
    phases(i) = std::exp(Complex(0.0, -theta * eig.eigenvalues()(i)));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

MultiModeState apply_beamsplitter(const MultiModeState& s, std::string_view m1, std::string_view m2,
                                  double transmission) {
  if (m1 == m2) throw Error(ErrorCode::label, "beamsplitter needs two distinct modes");
  const auto i1 = s.index_of(m1);
  const auto i2 = s.index_of(m2);
  const Matrix u = beamsplitter_unitary(s.modes()[i1].dim, s.modes()[i2].dim, transmission);
  const auto layout = make_layout(s.dims(), {i1, i2});
  return MultiModeState(s.modes(), hermitian_part(sandwich(s.matrix(), layout, u, u)), s.norm_policy());
}

MultiModeState partial_trace(const MultiModeState& s, const std::vector<std::string>& keep) {
  if (keep.empty()) throw Error(ErrorCode::invalid_argument, "partial_trace: keep list is empty");
  const auto keep_idx = indices_of(s, keep);
  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < s.modes().size(); ++k)
    if (std::find(keep_idx.begin(), keep_idx.end(), k) == keep_idx.end()) traced.push_back(k);
  const auto dims = s.dims();
  const auto kept = make_layout(dims, keep_idx).offsets;
  const auto gone = make_layout(dims, traced).offsets;
  const Index n = static_cast<Index>(kept.size());
  Matrix out = Matrix::Zero(n, n);
  const Matrix& rho = s.matrix();
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) {
      Complex acc = 0.0;
      for (Index t : gone) acc += rho(kept[a] + t, kept[b] + t);
      out(a, b) = acc;
    }
  std::vector<ModeSpec> modes;
  for (std::size_t k : keep_idx) modes.push_back(s.modes()[k]);
  return MultiModeState(std::move(modes), hermitian_part(out), s.norm_policy());
}

Matrix partial_transpose(const MultiModeState& s, const std::vector<std::string>& modes) {
  const auto idx = indices_of(s, modes);
  const auto dims = s.dims();
  const auto strides = strides_of(dims);
  const Index n = s.dim();
  // Split every index into the transposed digits and the rest.
  std::vector<Index> part(n), rest(n);
  for (Index i = 0; i < n; ++i) {
    Index p = 0;
    for (std::size_t k : idx) p += ((i / strides[k]) % dims[k]) * strides[k];
    part[i] = p;
    rest[i] = i - p;
  }
  const Matrix& rho = s.matrix();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = rho(rest[i] + part[j], rest[j] + part[i]);
  return out;
}

MultiModeState apply_operator(const MultiModeState& s, const std::vector<std::string>& targets,
                              const Matrix& op) {
  const auto idx = indices_of(s, targets);
  const auto layout = make_layout(s.dims(), idx);
  const Index t = static_cast<Index>(layout.offsets.size());
  if (op.rows() != t || op.cols() != t)
    throw Error(ErrorCode::invalid_argument, "operator size does not match target modes");
  return MultiModeState(s.modes(), hermitian_part(sandwich(s.matrix(), layout, op, op)),
                        NormPolicy::unnormalized);
}

MultiModeState apply_kraus(const MultiModeState& s, std::string_view mode, std::span<const Matrix> kraus,
                           std::span<const double> weights) {
  if (!weights.empty() && weights.size() != kraus.size())
    throw Error(ErrorCode::invalid_argument, "apply_kraus: one weight per Kraus operator");
  const auto k = s.index_of(mode);
  const auto layout = make_layout(s.dims(), {k});
  const int d = s.modes()[k].dim;
  Matrix acc = Matrix::Zero(s.dim(), s.dim());
  for (std::size_t i = 0; i < kraus.size(); ++i) {
    if (kraus[i].rows() != d || kraus[i].cols() != d)
      throw Error(ErrorCode::invalid_argument, "Kraus operator size does not match mode dimension");
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w == 0.0) continue;
    acc += w * sandwich(s.matrix(), layout, kraus[i], kraus[i]);
  }
  return MultiModeState(s.modes(), hermitian_part(acc), NormPolicy::unnormalized);
}

Matrix annihilation(int dim) {
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Vector fock_ket(int dim, int n) {
  if (n < 0 || n >= dim) throw Error(ErrorCode::truncation, "Fock level outside truncation");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return v;
}

std::vector<Matrix> loss_kraus(int dim, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::invalid_argument, "loss transmission must lie in [0,1]");
  std::vector<Matrix> out;
  out.reserve(dim);
  for (int k = 0; k < dim; ++k) {
    Matrix kr = Matrix::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      double amp;
      if (eta == 1.0) amp = k == 0 ? 1.0 : 0.0;
      else if (eta == 0.0) amp = n == k ? 1.0 : 0.0;
      else amp = std::exp(0.5 * (log_binomial(n, k) + (n - k) * std::log(eta) + k * std::log1p(-eta)));
      kr(n - k, n) = amp;
    }
    out.push_back(std::move(kr));
  }
  return out;
}

std::vector<double> hermite_functions(int count, double x) {
  std::vector<double> psi(std::max(count, 0));
  if (count <= 0) return psi;
  psi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (count > 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 1; n + 1 < count; ++n)
    psi[n + 1] = std::sqrt(2.0 / (n + 1)) * x * psi[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * psi[n - 1];
  return psi;
}

HomodyneWindowOp homodyne_window(double delta, int dim) {
  if (dim < 1) throw Error(ErrorCode::invalid_argument, "window dimension must be positive");
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_argument, "window width must be > 0 (or infinite)");
  HomodyneWindowOp op{delta, RealMatrix::Zero(dim, dim)};
  if (std::isinf(delta)) {
    op.matrix.setIdentity();
    return op;
  }
  const double half = 0.5 * delta * kSigma0;
  using boost::math::quadrature::gauss_kronrod;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; j += 2) {
      // Even integrand: integrate [0, half] and double. The interval is mapped
      // onto [0, 1] so the error test does not depend on the window width.
      auto integrand = [i, j, dim, half](double u) {
        const auto psi = hermite_functions(dim, half * u);
        return half * psi[i] * psi[j];
      };
      double err = 0.0;
      const double v = 2.0 * gauss_kronrod<double, 31>::integrate(integrand, 0.0, 1.0, 15, 1e-12, &err);
      op.matrix(i, j) = v;
      op.matrix(j, i) = v;
    }
  return op;
}

RealMatrix homodyne_window_zero_limit(int dim) {
  const auto psi = hermite_functions(dim, 0.0);
  RealMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = psi[i] * psi[j];
  return m;
}

MultiModeState condition_on_window(const MultiModeState& s, std::string_view mode, const RealMatrix& window) {
  const auto k = s.index_of(mode);
  if (s.modes().size() < 2) throw Error(ErrorCode::invalid_argument, "conditioning would remove the last mode");
  const int d = s.modes()[k].dim;
  if (window.rows() != d || window.cols() != d)
    throw Error(ErrorCode::invalid_argument, "window size does not match mode dimension");
  const auto dims = s.dims();
  const auto layout = make_layout(dims, {k});
  const Index n = static_cast<Index>(layout.bases.size());
  const Matrix& rho = s.matrix();
  Matrix out = Matrix::Zero(n, n);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double w = window(i, j);
      if (w == 0.0) continue;
      const Index oi = layout.offsets[i];
      const Index oj = layout.offsets[j];
      for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b) out(a, b) += w * rho(layout.bases[a] + oi, layout.bases[b] + oj);
    }
  std::vector<ModeSpec> modes;
  for (std::size_t m = 0; m < s.modes().size(); ++m)
    if (m != k) modes.push_back(s.modes()[m]);
  return MultiModeState(std::move(modes), hermitian_part(out), NormPolicy::unnormalized);
}

}  // namespace hybridswap
