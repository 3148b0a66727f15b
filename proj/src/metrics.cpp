#include "hybridswap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hybridswap/error.hpp"

namespace hybridswap {
namespace {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

double negativity(const MultiModeState& s, const std::vector<std::string>& side) {
  if (side.empty() || side.size() >= s.modes().size())
    throw Error(ErrorCode::invalid_argument, "negativity needs a proper, non-empty partition");
  const Matrix pt = partial_transpose(s.normalized(), side);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (pt + pt.adjoint()), Eigen::EigenvaluesOnly);
  double neg = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i)
    if (eig.eigenvalues()(i) < 0.0) neg -= eig.eigenvalues()(i);
  return neg;
}

double log_negativity_from(double negativity_value) { return std::log2(2.0 * negativity_value + 1.0); }

double log_negativity(const MultiModeState& s, const std::vector<std::string>& side) {
  return log_negativity_from(negativity(s, side));
}

double fidelity(const MultiModeState& a, const MultiModeState& b) {
  if (a.dims() != b.dims()) throw Error(ErrorCode::invalid_argument, "fidelity: register dimensions differ");
  const Matrix ra = a.normalized().matrix();
  const Matrix rb = b.normalized().matrix();
  const Matrix sa = psd_sqrt(ra);
  const Matrix inner = sa * rb * sa;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  const double tr = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(tr * tr, 0.0, 1.0);
}

double purity(const MultiModeState& s) {
  const Matrix r = s.normalized().matrix();
  // Tr(r^2) = sum |r_ij|^2 for Hermitian r.
  return r.cwiseAbs2().sum();
}

NegativityFit extrapolate_log_negativity(std::span<const PartitionValue> values) {
  std::map<std::size_t, std::vector<double>> by_size;
  for (const auto& v : values) {
    if (v.size == 0) throw Error(ErrorCode::invalid_argument, "partition size must be positive");
    if (!std::isfinite(v.value)) throw Error(ErrorCode::numerical, "non-finite partition value");
    by_size[v.size].push_back(v.value);
  }
  if (by_size.size() < 3)
    throw Error(ErrorCode::invalid_argument, "extrapolation needs at least three distinct partition sizes");

  NegativityFit fit;
  std::vector<double> xs, ys;
  // Pooled single-partition variance scaled to unit size, v = n s_n^2.
  double pooled = 0.0, dof = 0.0;
  for (const auto& [size, vals] : by_size) {
    const double k = static_cast<double>(vals.size());
    double mean = 0.0;
    for (double x : vals) mean += x;
    mean /= k;
    double ss = 0.0;
    for (double x : vals) ss += (x - mean) * (x - mean);
    const double sd = vals.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
    fit.table.push_back({size, vals.size(), mean, 0.0, sd});
    xs.push_back(1.0 / std::sqrt(static_cast<double>(size)));
    ys.push_back(mean);
    pooled += ss * static_cast<double>(size);
    dof += k - 1.0;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, sum_x2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    sum_x2 += xs[i] * xs[i];
  }
  if (!(sxx > 1e-300)) throw Error(ErrorCode::numerical, "degenerate design matrix in extrapolation");
  fit.c = sxy / sxx;
  fit.e_infinity = my - fit.c * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.e_infinity + fit.c * xs[i]);
    fit.table[i].residual = r;
    rss += r * r;
  }
  const double s2 = rss / (n - 2.0);
  fit.c_stderr = std::sqrt(s2 / sxx);
  fit.e_infinity_fit_stderr = std::sqrt(s2 * sum_x2 / (n * sxx));
  // Every partition is cut from the same data, so the size means share the
  // noise of the largest set; the fit residuals cannot see that part.
  fit.sampling_stderr = dof > 0.0 ? std::sqrt(pooled / dof / static_cast<double>(by_size.rbegin()->first)) : 0.0;
  fit.e_infinity_stderr = std::hypot(fit.e_infinity_fit_stderr, fit.sampling_stderr);
  return fit;
}

}  // namespace hybridswap
