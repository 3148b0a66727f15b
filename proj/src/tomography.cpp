#include "hybridswap/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/laguerre.hpp>

#include "hybridswap/channel.hpp"
#include "hybridswap/error.hpp"

namespace hybridswap {
namespace {

using Index = Eigen::Index;

// Integrals of psi_m psi_n over each bin of a uniform grid on [-range, range].
class BinTable {
 public:
  BinTable(int dim, double width, double range) : dim_(dim), width_(width), lo_(-range) {
    if (!(width > 0.0) || !(range > 0.0)) throw Error(ErrorCode::invalid_argument, "bad bin grid");
    count_ = static_cast<int>(std::ceil(2.0 * range / width));
    using rule = boost::math::quadrature::gauss<double, 10>;
    const auto& nodes = rule::abscissa();
    const auto& weights = rule::weights();
    table_.reserve(count_);
    for (int b = 0; b < count_; ++b) {
      const double mid = lo_ + (b + 0.5) * width_;
      const double half = 0.5 * width_;
      RealMatrix m = RealMatrix::Zero(dim, dim);
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (double sign : {-1.0, 1.0}) {
          const auto psi = hermite_functions(dim, mid + sign * half * nodes[k]);
          const Eigen::Map<const Eigen::VectorXd> v(psi.data(), dim);
          m.noalias() += half * weights[k] * v * v.transpose();
        }
      }
      table_.push_back(std::move(m));
    }
  }

  int count() const { return count_; }
  double lower(int b) const { return lo_ + b * width_; }
  double width() const { return width_; }
  int bin_of(double x) const {
    const int b = static_cast<int>(std::floor((x - lo_) / width_));
    return std::clamp(b, 0, count_ - 1);
  }
  const RealMatrix& integrals(int b) const { return table_[b]; }

  /// <m|Pi|n> for the bin projector at phase theta.
  Matrix projector(int b, double theta) const {
    Matrix p(dim_, dim_);
    const RealMatrix& t = table_[b];
    for (int m = 0; m < dim_; ++m)
      for (int n = 0; n < dim_; ++n) p(m, n) = std::polar(t(m, n), (m - n) * theta);
    return p;
  }

 private:
  int dim_;
  double width_;
  double lo_;
  int count_ = 0;
  std::vector<RealMatrix> table_;
};

// Heisenberg picture of a loss eta: Pi -> sum_k K_k^dagger Pi K_k.
Matrix degrade(const Matrix& pi, const std::vector<Matrix>& kraus) {
  if (kraus.empty()) return pi;
  Matrix out = Matrix::Zero(pi.rows(), pi.cols());
  for (const auto& k : kraus) out.noalias() += k.adjoint() * pi * k;
  return out;
}

double trace_product(const Matrix& rho, const Matrix& pi) {
  // Re Tr(rho Pi) = Re sum_mn rho_mn Pi_nm
  return (rho.cwiseProduct(pi.transpose())).sum().real();
}

// Tr(X Pi) for a non-Hermitian block X.
Complex trace_complex(const Matrix& x, const Matrix& pi) { return x.cwiseProduct(pi.transpose()).sum(); }

void check_efficiency(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorCode::invalid_argument, "efficiency must lie in (0,1]");
}

int phase_index(std::map<double, int>& phases, double theta) {
  auto [it, inserted] = phases.try_emplace(theta, static_cast<int>(phases.size()));
  return it->second;
}

// Largest eigenvalue of R minus one. By concavity, no state beats the
// current per-sample log-likelihood by more than this.
double likelihood_gap(const Matrix& r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(r, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() - 1.0;
}

double dot(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b.conjugate()).sum().real(); }

// rho -> R rho R, with a diluted step whenever the full step would lower the
// likelihood. When that stalls short of the certified optimum the search goes
// on with L-BFGS over rho = A A^dagger / Tr(A A^dagger).
template <class Model>
MleResult run_mle(const Model& model, std::vector<ModeSpec> modes, const MleOptions& opts) {
  const Index n = model.dim();
  Matrix rho = Matrix::Identity(n, n) / double(n);
  const auto& freq = model.frequencies();
  std::vector<double> p(freq.size());
  std::vector<double> w(freq.size());

  auto loglik = [&](const Matrix& r) {
    model.probabilities(r, p);
    double l = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (freq[c] > 0.0 && !(p[c] > 0.0)) return -std::numeric_limits<double>::infinity();
      l += freq[c] * std::log(p[c]);
    }
    return l;
  };
  auto r_of = [&](const Matrix& r) {
    model.probabilities(r, p);
    for (std::size_t c = 0; c < p.size(); ++c) w[c] = freq[c] / std::max(p[c], 1e-300);
    return model.r_operator(w);
  };

  double current = loglik(rho);
  MleResult result{MultiModeState(modes, rho), 0, false, true, current};
  const Matrix id = Matrix::Identity(n, n);
  int it = 0;
  bool stalled = false;
  for (; it < opts.max_iters; ++it) {
    const Matrix r = r_of(rho);
    if (likelihood_gap(r) < opts.gap_tol) {
      result.converged = true;
      break;
    }
    Matrix next = r * rho * r;
    next /= next.trace().real();
    double proposed = loglik(next);
    bool diluted = false;
    double eps = 1.0;
    while (!(proposed > current) && eps > 1e-12) {
      diluted = true;
      const Matrix step = id + eps * r;
      next = step * rho * step;
      next /= next.trace().real();
      proposed = loglik(next);
      eps *= 0.5;
    }
    if (proposed > current) {
      rho = 0.5 * (next + next.adjoint());
      const double gain = proposed - current;
      current = proposed;
      if (diluted || gain < opts.tol) {
        stalled = true;
        ++it;
        break;
      }
    } else {
      stalled = true;
      break;
    }
  }

  if (stalled && !result.converged) {
    // f(A) = -loglik(A A^dag / Tr), gradient -2 (R - I) A / Tr(A A^dag).
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    Matrix a = es.eigenvectors() * es.eigenvalues().cwiseMax(1e-14).cwiseSqrt().asDiagonal();
    auto state_of = [&](const Matrix& x) {
      Matrix s = x * x.adjoint();
      s /= s.trace().real();
      return Matrix(0.5 * (s + s.adjoint()));
    };
    auto grad_of = [&](const Matrix& x, const Matrix& s) {
      return Matrix(-2.0 * (r_of(s) - id) * x / (x.squaredNorm()));
    };
    std::vector<Matrix> hist_s, hist_y;
    std::vector<double> hist_rho;
    const int memory = 8;
    Matrix g = grad_of(a, rho);
    int flat = 0;
    for (; it < opts.max_iters; ++it) {
      if (likelihood_gap(r_of(rho)) < opts.gap_tol) {
        result.converged = true;
        break;
      }
      // Two-loop recursion.
      Matrix q = g;
      std::vector<double> alpha(hist_s.size());
      for (int k = int(hist_s.size()) - 1; k >= 0; --k) {
        alpha[k] = hist_rho[k] * dot(hist_s[k], q);
        q -= alpha[k] * hist_y[k];
      }
      if (!hist_s.empty()) q *= dot(hist_s.back(), hist_y.back()) / hist_y.back().squaredNorm();
      for (std::size_t k = 0; k < hist_s.size(); ++k) {
        const double beta = hist_rho[k] * dot(hist_y[k], q);
        q += (alpha[k] - beta) * hist_s[k];
      }
      Matrix d = -q;
      double slope = dot(g, d);
      if (!(slope < 0.0)) {
        hist_s.clear();
        hist_y.clear();
        hist_rho.clear();
        d = -g;
        slope = -g.squaredNorm();
      }
      if (hist_s.empty()) d *= std::min(1.0, 0.1 * a.norm() / std::max(d.norm(), 1e-300));
      // Armijo backtracking on f = -loglik.
      double step = 1.0, trial = -std::numeric_limits<double>::infinity();
      Matrix a_new, rho_new;
      for (int k = 0; k < 60; ++k) {
        a_new = a + step * d;
        rho_new = state_of(a_new);
        trial = loglik(rho_new);
        if (trial >= current - 1e-4 * step * slope && trial > current) break;
        step *= 0.5;
      }
      if (!(trial > current)) break;  // no representable progress left
      const Matrix g_new = grad_of(a_new, rho_new);
      const Matrix sv = a_new - a, yv = g_new - g;
      const double sy = dot(sv, yv);
      if (sy > 1e-300) {
        hist_s.push_back(sv);
        hist_y.push_back(yv);
        hist_rho.push_back(1.0 / sy);
        if (int(hist_s.size()) > memory) {
          hist_s.erase(hist_s.begin());
          hist_y.erase(hist_y.begin());
          hist_rho.erase(hist_rho.begin());
        }
      }
      flat = trial - current < 1e-15 ? flat + 1 : 0;
      a = a_new;
      rho = rho_new;
      g = g_new;
      current = trial;
      if (flat >= 5) break;
    }
    if (!result.converged && likelihood_gap(r_of(rho)) < opts.gap_tol) result.converged = true;
  }
  result.iterations = it;
  result.state = MultiModeState(std::move(modes), rho);
  result.log_likelihood = current;
  return result;
}

class SingleModeModel {
 public:
  SingleModeModel(std::span<const QuadratureSample> samples, int dim, double efficiency, const MleOptions& opts)
      : dim_(dim) {
    const BinTable bins(dim, opts.bin_width, opts.range);
    const auto kraus = opts.compensate && efficiency < 1.0 ? loss_kraus(dim, efficiency) : std::vector<Matrix>{};
    std::map<double, int> phases;
    std::map<std::pair<int, int>, std::size_t> cell_of;
    std::vector<double> thetas;
    for (const auto& s : samples) {
      const int k = phase_index(phases, s.phase);
      if (k == static_cast<int>(thetas.size())) thetas.push_back(s.phase);
      const int b = bins.bin_of(s.value);
      auto [it, inserted] = cell_of.try_emplace({k, b}, freq_.size());
      if (inserted) {
        freq_.push_back(0.0);
        povm_.push_back(degrade(bins.projector(b, s.phase), kraus));
      }
      freq_[it->second] += 1.0;
    }
    for (auto& f : freq_) f /= double(samples.size());
  }

  Index dim() const { return dim_; }
  const std::vector<double>& frequencies() const { return freq_; }
  void probabilities(const Matrix& rho, std::vector<double>& p) const {
    for (std::size_t c = 0; c < povm_.size(); ++c) p[c] = trace_product(rho, povm_[c]);
  }
  Matrix r_operator(const std::vector<double>& w) const {
    Matrix r = Matrix::Zero(dim_, dim_);
    for (std::size_t c = 0; c < povm_.size(); ++c) r.noalias() += w[c] * povm_[c];
    return r;
  }

 private:
  Index dim_;
  std::vector<double> freq_;
  std::vector<Matrix> povm_;
};

class TwoModeModel {
 public:
  TwoModeModel(std::span<const JointSample> samples, int dim_a, int dim_b, double eff_a, double eff_b,
               const MleOptions& opts)
      : da_(dim_a), db_(dim_b) {
    const BinTable bins_a(dim_a, opts.bin_width, opts.range);
    const BinTable bins_b(dim_b, opts.bin_width, opts.range);
    const auto ka = opts.compensate && eff_a < 1.0 ? loss_kraus(dim_a, eff_a) : std::vector<Matrix>{};
    const auto kb = opts.compensate && eff_b < 1.0 ? loss_kraus(dim_b, eff_b) : std::vector<Matrix>{};
    std::map<double, int> phases_a, phases_b;
    std::map<std::pair<int, int>, int> a_key, b_key;
    std::map<std::pair<int, int>, std::size_t> cell_of;  // (a key, b key)
    std::vector<std::pair<int, int>> cells;
    for (const auto& s : samples) {
      const int pa = phase_index(phases_a, s.phase_a);
      const int pb = phase_index(phases_b, s.phase_b);
      const int ba = bins_a.bin_of(s.value_a);
      const int bb = bins_b.bin_of(s.value_b);
      auto [ia, new_a] = a_key.try_emplace({pa, ba}, static_cast<int>(pov_a_.size()));
      if (new_a) pov_a_.push_back(degrade(bins_a.projector(ba, s.phase_a), ka));
      auto [ib, new_b] = b_key.try_emplace({pb, bb}, static_cast<int>(pov_b_.size()));
      if (new_b) pov_b_.push_back(degrade(bins_b.projector(bb, s.phase_b), kb));
      auto [ic, new_c] = cell_of.try_emplace({ia->second, ib->second}, cells.size());
      if (new_c) {
        cells.emplace_back(ia->second, ib->second);
        freq_.push_back(0.0);
      }
      freq_[ic->second] += 1.0;
    }
    for (auto& f : freq_) f /= double(samples.size());
    // Cells grouped by their B key so each B projector is contracted once.
    order_.resize(cells.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t x, std::size_t y) { return cells[x].second < cells[y].second; });
    cell_a_.resize(cells.size());
    cell_b_.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      cell_a_[c] = cells[c].first;
      cell_b_[c] = cells[c].second;
    }
  }

  Index dim() const { return da_ * db_; }
  const std::vector<double>& frequencies() const { return freq_; }

  void probabilities(const Matrix& rho, std::vector<double>& p) const {
    Matrix m(da_, da_);
    int current_b = -1;
    for (std::size_t c : order_) {
      if (cell_b_[c] != current_b) {
        current_b = cell_b_[c];
        const Matrix& pb = pov_b_[current_b];
        for (Index a = 0; a < da_; ++a)
          for (Index a2 = 0; a2 < da_; ++a2)
            m(a, a2) = trace_complex(rho.block(a * db_, a2 * db_, db_, db_), pb);
      }
      p[c] = trace_product(m, pov_a_[cell_a_[c]]);
    }
  }

  Matrix r_operator(const std::vector<double>& w) const {
    Matrix r = Matrix::Zero(dim(), dim());
    Matrix s = Matrix::Zero(da_, da_);
    int current_b = -1;
    auto flush = [&]() {
      if (current_b < 0) return;
      const Matrix& pb = pov_b_[current_b];
      for (Index a = 0; a < da_; ++a)
        for (Index a2 = 0; a2 < da_; ++a2) r.block(a * db_, a2 * db_, db_, db_) += s(a, a2) * pb;
      s.setZero();
    };
    for (std::size_t c : order_) {
      if (cell_b_[c] != current_b) {
        flush();
        current_b = cell_b_[c];
      }
      s.noalias() += w[c] * pov_a_[cell_a_[c]];
    }
    flush();
    return r;
  }

 private:
  Index da_, db_;
  std::vector<double> freq_;
  std::vector<Matrix> pov_a_, pov_b_;
  std::vector<int> cell_a_, cell_b_;
  std::vector<std::size_t> order_;
};

}  // namespace

std::vector<double> default_phases(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "need at least one phase");
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = M_PI * k / n;
  return out;
}

std::vector<QuadratureSample> sample_quadratures(const MultiModeState& s, std::span<const double> phases,
                                                 std::size_t n_per_phase, double efficiency, std::uint64_t seed) {
  if (s.modes().size() != 1) throw Error(ErrorCode::invalid_argument, "sample_quadratures needs a single mode");
  if (s.norm_policy() != NormPolicy::normalized)
    throw Error(ErrorCode::invalid_argument, "sample_quadratures needs a normalized state");
  check_efficiency(efficiency);
  const std::string label = s.modes()[0].label;
  const MultiModeState lossy = apply_loss(s, label, efficiency);
  const Matrix& rho = lossy.matrix();
  const int d = static_cast<int>(rho.rows());

  // Fine grid wide enough for the highest Fock level present.
  const double reach = std::sqrt(2.0 * d + 1.0) + 6.0;
  const int points = 8001;
  const double step = 2.0 * reach / (points - 1);
  std::vector<std::vector<double>> psi(points);
  for (int i = 0; i < points; ++i) psi[i] = hermite_functions(d, -reach + i * step);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<QuadratureSample> out;
  out.reserve(phases.size() * n_per_phase);
  std::vector<double> density(points), cdf(points);
  for (double theta : phases) {
    // p(x) = sum_mn rho_mn e^{-i(m-n) theta} psi_m psi_n
    Matrix rot(d, d);
    for (int m = 0; m < d; ++m)
      for (int n = 0; n < d; ++n) rot(m, n) = rho(m, n) * std::polar(1.0, -(m - n) * theta);
    const RealMatrix re = rot.real();
    for (int i = 0; i < points; ++i) {
      const Eigen::Map<const Eigen::VectorXd> v(psi[i].data(), d);
      density[i] = std::max(0.0, v.dot(re * v));
    }
    cdf[0] = 0.0;
    for (int i = 1; i < points; ++i) cdf[i] = cdf[i - 1] + 0.5 * step * (density[i] + density[i - 1]);
    const double total = cdf.back();
    if (!(total > 0.0)) throw Error(ErrorCode::numerical, "quadrature marginal has no weight");
    for (std::size_t k = 0; k < n_per_phase; ++k) {
      const double u = uni(rng) * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const int hi = std::clamp(static_cast<int>(it - cdf.begin()), 1, points - 1);
      const int lo = hi - 1;
      const double span = cdf[hi] - cdf[lo];
      const double frac = span > 0.0 ? (u - cdf[lo]) / span : 0.5;
      out.push_back({theta, -reach + (lo + frac) * step, label});
    }
  }
  return out;
}

std::vector<JointSample> sample_joint_quadratures(const MultiModeState& s, std::span<const double> phases_a,
                                                  std::span<const double> phases_b, std::size_t n_per_pair,
                                                  double efficiency_a, double efficiency_b, std::uint64_t seed) {
  if (s.modes().size() != 2) throw Error(ErrorCode::invalid_argument, "joint sampling needs a two-mode state");
  if (s.norm_policy() != NormPolicy::normalized)
    throw Error(ErrorCode::invalid_argument, "joint sampling needs a normalized state");
  check_efficiency(efficiency_a);
  check_efficiency(efficiency_b);
  const auto& modes = s.modes();
  const MultiModeState lossy =
      apply_loss(apply_loss(s, modes[0].label, efficiency_a), modes[1].label, efficiency_b);
  const Matrix& rho = lossy.matrix();
  const int da = modes[0].dim, db = modes[1].dim;
  const MleOptions grid;
  const BinTable bins_a(da, grid.bin_width, grid.range);
  const BinTable bins_b(db, grid.bin_width, grid.range);
  const int na = bins_a.count(), nb = bins_b.count();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<JointSample> out;
  out.reserve(phases_a.size() * phases_b.size() * n_per_pair);
  std::vector<double> cdf(static_cast<std::size_t>(na) * nb);
  std::vector<Matrix> pa(na);
  Matrix m(da, da);
  for (double ta : phases_a) {
    for (int i = 0; i < na; ++i) pa[i] = bins_a.projector(i, ta);
    for (double tb : phases_b) {
      double acc = 0.0;
      for (int j = 0; j < nb; ++j) {
        const Matrix pb = bins_b.projector(j, tb);
        for (int a = 0; a < da; ++a)
          for (int a2 = 0; a2 < da; ++a2) m(a, a2) = trace_complex(rho.block(a * db, a2 * db, db, db), pb);
        for (int i = 0; i < na; ++i) {
          acc += std::max(0.0, trace_product(m, pa[i]));
          cdf[static_cast<std::size_t>(j) * na + i] = acc;
        }
      }
      if (!(acc > 0.0)) throw Error(ErrorCode::numerical, "joint quadrature distribution has no weight");
      for (std::size_t k = 0; k < n_per_pair; ++k) {
        const double u = uni(rng) * acc;
        const auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const std::size_t cell = std::min(idx, cdf.size() - 1);
        const int j = static_cast<int>(cell / na), i = static_cast<int>(cell % na);
        const double xa = bins_a.lower(i) + uni(rng) * bins_a.width();
        const double xb = bins_b.lower(j) + uni(rng) * bins_b.width();
        out.push_back({ta, xa, tb, xb});
      }
    }
  }
  return out;
}

MleResult mle_reconstruct(std::span<const QuadratureSample> samples, int dim, double efficiency,
                          const MleOptions& opts, const std::string& label) {
  check_efficiency(efficiency);
  if (dim < 2) throw Error(ErrorCode::invalid_argument, "reconstruction dimension must be >= 2");
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "no samples");
  const SingleModeModel model(samples, dim, efficiency, opts);
  return run_mle(model, {{label, dim}}, opts);
}

MleResult two_mode_mle(std::span<const JointSample> samples, int dim_a, int dim_b, double efficiency_a,
                       double efficiency_b, const MleOptions& opts, const std::array<std::string, 2>& labels) {
  check_efficiency(efficiency_a);
  check_efficiency(efficiency_b);
  if (dim_a < 2 || dim_b < 2) throw Error(ErrorCode::invalid_argument, "reconstruction dimensions must be >= 2");
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "no samples");
  const TwoModeModel model(samples, dim_a, dim_b, efficiency_a, efficiency_b, opts);
  return run_mle(model, {{labels[0], dim_a}, {labels[1], dim_b}}, opts);
}

// ---------------------------------------------------------------------------

std::vector<double> Axis::values() const {
  if (points < 2) return {min};
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) out[i] = min + (max - min) * i / (points - 1);
  return out;
}

namespace {

// Complex Wigner map of an operator O: W = sum_mn O_mn W_{|m><n|}, with
//   W_{|m><n|} = ((-1)^n / pi) sqrt(n!/m!) (sqrt2 (x - ip))^{m-n} e^{-r^2} L_n^{(m-n)}(2 r^2),  m >= n,
// and W_{|n><m|} its complex conjugate.
Complex wigner_point(const Matrix& op, double x, double p) {
  const int d = static_cast<int>(op.rows());
  const double r2 = x * x + p * p;
  const Complex z = std::sqrt(2.0) * Complex(x, -p);
  const double gauss = std::exp(-r2) / M_PI;
  Complex total = 0.0;
  for (int n = 0; n < d; ++n) {
    Complex zp = 1.0;  // z^(m-n)
    for (int m = n; m < d; ++m) {
      const double coef = ((n % 2) ? -1.0 : 1.0) *
                          std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0))) *
                          boost::math::laguerre(static_cast<unsigned>(n), static_cast<unsigned>(m - n), 2.0 * r2);
      const Complex w = gauss * coef * zp;
      if (m == n) {
        total += op(m, n) * w;
      } else {
        total += op(m, n) * w + op(n, m) * std::conj(w);
      }
      zp *= z;
    }
  }
  return total;
}

}  // namespace

WignerGrid wigner_of_operator(const Matrix& op, const Axis& x_axis, const Axis& p_axis) {
  if (op.rows() != op.cols()) throw Error(ErrorCode::invalid_argument, "operator must be square");
  WignerGrid g{x_axis.values(), p_axis.values(), RealMatrix()};
  g.values.resize(static_cast<Index>(g.x.size()), static_cast<Index>(g.p.size()));
  for (std::size_t i = 0; i < g.x.size(); ++i)
    for (std::size_t j = 0; j < g.p.size(); ++j) g.values(i, j) = wigner_point(op, g.x[i], g.p[j]).real();
  return g;
}

WignerGrid wigner(const MultiModeState& s, const Axis& x_axis, const Axis& p_axis) {
  if (s.modes().size() != 1) throw Error(ErrorCode::invalid_argument, "wigner needs a single-mode state");
  return wigner_of_operator(s.normalized().matrix(), x_axis, p_axis);
}

std::array<std::array<WignerGrid, 2>, 2> hybrid_density_wigner(const MultiModeState& s, const std::string& dv_mode,
                                                               const std::string& cv_mode, const Axis& x_axis,
                                                               const Axis& p_axis) {
  if (s.modes().size() != 2) throw Error(ErrorCode::invalid_argument, "hybrid map needs a two-mode state");
  // Bring the register into (dv, cv) order.
  const MultiModeState ordered = partial_trace(s.normalized(), {dv_mode, cv_mode});
  const int ddv = ordered.modes()[0].dim, dcv = ordered.modes()[1].dim;
  if (ddv < 2) throw Error(ErrorCode::invalid_argument, "DV mode needs at least two levels");
  std::array<std::array<WignerGrid, 2>, 2> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out[i][j] = wigner_of_operator(ordered.matrix().block(i * dcv, j * dcv, dcv, dcv), x_axis, p_axis);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<PartitionValue> partition_log_negativities(std::span<const JointSample> samples,
                                                       const PartitionOptions& opts, std::uint64_t seed) {
  if (opts.divisions.empty()) throw Error(ErrorCode::invalid_argument, "no partition divisions");
  if (opts.shuffles < 1) throw Error(ErrorCode::invalid_argument, "shuffles must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<JointSample> data(samples.begin(), samples.end());
  std::vector<PartitionValue> out;
  for (int k : opts.divisions) {
    if (k < 1) throw Error(ErrorCode::invalid_argument, "division must be >= 1");
    const std::size_t size = data.size() / static_cast<std::size_t>(k);
    if (size == 0) throw Error(ErrorCode::invalid_argument, "partition would be empty");
    // The undivided set is the same whatever the shuffle.
    const int repeats = k == 1 ? 1 : opts.shuffles;
    for (int r = 0; r < repeats; ++r) {
      std::shuffle(data.begin(), data.end(), rng);
      for (int part = 0; part < k; ++part) {
        const std::span<const JointSample> chunk(data.data() + part * size, size);
        const auto fit = two_mode_mle(chunk, opts.dim_a, opts.dim_b, opts.efficiency_a, opts.efficiency_b, opts.mle);
        out.push_back({size, log_negativity(fit.state, {fit.state.modes()[0].label})});
      }
    }
  }
  return out;
}

}  // namespace hybridswap
