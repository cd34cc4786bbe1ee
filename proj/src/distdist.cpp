#include "imgeval/distdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "imgeval/error.hpp"

namespace imgeval {

std::string to_string(Precision p) { return p == Precision::Single ? "f32" : "f64"; }

Precision parse_precision(const std::string& s) {
  if (s == "f32") return Precision::Single;
  if (s == "f64") return Precision::Double;
  throw ConfigError("precision must be f32 or f64, got '" + s + "'");
}

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
Mat<Scalar> as_matrix(const ActivationSet& a) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> m(a.data().data(), static_cast<Eigen::Index>(a.n()),
                                     static_cast<Eigen::Index>(a.d()));
  return m.template cast<Scalar>();
}

template <typename Scalar>
GaussianStatsT<Scalar> stats_impl(const ActivationSet& a) {
  if (a.n() < 2) {
    throw DegenerateInputError("gaussian_stats: need at least 2 rows, got " + std::to_string(a.n()));
  }
  const Mat<Scalar> x = as_matrix<Scalar>(a);
  GaussianStatsT<Scalar> s;
  s.n = a.n();
  s.mean = x.colwise().mean().transpose();
  const Mat<Scalar> centred = x.rowwise() - s.mean.transpose();
  Mat<Scalar> cov = (centred.transpose() * centred) / static_cast<Scalar>(a.n() - 1);
  s.cov = (cov + cov.transpose()) / Scalar(2);
  return s;
}

template <typename Scalar>
void require_symmetric(const Mat<Scalar>& m) {
  if (m.rows() != m.cols()) throw ConfigError("sqrtm_psd: matrix is not square");
  const double scale = m.size() == 0 ? 0.0 : static_cast<double>(m.cwiseAbs().maxCoeff());
  const double asym = m.size() == 0 ? 0.0 : static_cast<double>((m - m.transpose()).cwiseAbs().maxCoeff());
  if (asym > 1e-9 * (1.0 + scale)) {
    throw ConfigError("sqrtm_psd: matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }
}

// Square roots of eigenvalues, with negatives and those below the numerical
// rank cutoff d * eps * max(lambda) treated as 0.
template <typename Scalar>
Vec<Scalar> spectrum_roots(const Vec<Scalar>& eigenvalues) {
  if (eigenvalues.size() == 0) return eigenvalues;
  const Scalar cutoff = static_cast<Scalar>(eigenvalues.size()) *
                        std::numeric_limits<Scalar>::epsilon() *
                        std::max(eigenvalues.maxCoeff(), Scalar(0));
  return eigenvalues.unaryExpr([cutoff](Scalar v) { return v > cutoff ? std::sqrt(v) : Scalar(0); });
}

template <typename Scalar>
Mat<Scalar> sqrtm_impl(const Mat<Scalar>& m) {
  require_symmetric(m);
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m);
  if (es.info() != Eigen::Success) throw DegenerateInputError("sqrtm_psd: eigendecomposition failed");
  const Vec<Scalar> roots = spectrum_roots<Scalar>(es.eigenvalues());
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

// Trace of the square root of a symmetric PSD matrix: sum of sqrt(eigenvalues).
template <typename Scalar>
Scalar trace_sqrtm(const Mat<Scalar>& m) {
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DegenerateInputError("fid: eigendecomposition failed");
  return spectrum_roots<Scalar>(es.eigenvalues()).sum();
}

template <typename Scalar>
double fid_impl(const GaussianStatsT<Scalar>& a, const GaussianStatsT<Scalar>& b) {
  if (a.dim() != b.dim() || a.cov.rows() != a.dim() || b.cov.rows() != b.dim()) {
    throw DimensionError("fid: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()) + ")");
  }
  const Scalar mean_term = (a.mean - b.mean).squaredNorm();
  const Mat<Scalar> root_a = sqrtm_impl<Scalar>(a.cov);
  Mat<Scalar> inner = root_a * b.cov * root_a;
  inner = (inner + inner.transpose()) / Scalar(2);
  const Scalar tr_a = a.cov.trace();
  const Scalar tr_b = b.cov.trace();
  const Scalar value = mean_term + tr_a + tr_b - Scalar(2) * trace_sqrtm<Scalar>(inner);

  double tolerance = kFidClampTolerance;
  if constexpr (std::is_same_v<Scalar, float>) {
    // float roundoff grows with the magnitude of the summed terms.
    tolerance += 64.0 * std::numeric_limits<float>::epsilon() *
                 static_cast<double>(std::abs(mean_term) + std::abs(tr_a) + std::abs(tr_b));
  }
  const auto v = static_cast<double>(value);
  return (v < 0.0 && v >= -tolerance) ? 0.0 : v;
}

template <typename Scalar>
GaussianStatsT<float> to_float(const GaussianStatsT<Scalar>& s) {
  GaussianStatsT<float> f;
  f.mean = s.mean.template cast<float>();
  f.cov = s.cov.template cast<float>();
  f.n = s.n;
  return f;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double d) {
  Eigen::MatrixXd k = (a * b.transpose()) / d;
  return k.unaryExpr([](double v) {
    const double t = v + 1.0;
    return t * t * t;
  });
}

}  // namespace

GaussianStats gaussian_stats(const ActivationSet& a) { return stats_impl<double>(a); }
GaussianStatsT<float> gaussian_stats_f32(const ActivationSet& a) { return stats_impl<float>(a); }

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) { return sqrtm_impl<double>(m); }
Eigen::MatrixXf sqrtm_psd(const Eigen::MatrixXf& m) { return sqrtm_impl<float>(m); }

double fid(const GaussianStats& a, const GaussianStats& b, Precision prec) {
  if (prec == Precision::Single) return fid_impl<float>(to_float(a), to_float(b));
  return fid_impl<double>(a, b);
}

double fid(const GaussianStatsT<float>& a, const GaussianStatsT<float>& b) {
  return fid_impl<float>(a, b);
}

double fid(const ActivationSet& a, const ActivationSet& b, Precision prec) {
  if (a.d() != b.d()) throw DimensionError("fid: activation dimension mismatch");
  if (prec == Precision::Single) return fid_impl<float>(gaussian_stats_f32(a), gaussian_stats_f32(b));
  return fid_impl<double>(gaussian_stats(a), gaussian_stats(b));
}

double poly_kernel(std::span<const double> alpha, std::span<const double> omega) {
  if (alpha.size() != omega.size()) throw DimensionError("poly_kernel: length mismatch");
  if (alpha.empty()) throw DimensionError("poly_kernel: empty vectors");
  const double dot = std::inner_product(alpha.begin(), alpha.end(), omega.begin(), 0.0);
  const double t = dot / static_cast<double>(alpha.size()) + 1.0;
  return t * t * t;
}

double kid_unbiased(const ActivationSet& x, const ActivationSet& y) {
  if (x.n() < 2 || y.n() < 2) {
    throw DegenerateInputError("kid: each set needs at least 2 rows (got " + std::to_string(x.n()) +
                               " and " + std::to_string(y.n()) + ")");
  }
  if (x.d() != y.d()) throw DimensionError("kid: dimension mismatch");
  if (x.d() == 0) throw DimensionError("kid: zero-dimensional activations");
  const auto mx = as_matrix<double>(x);
  const auto my = as_matrix<double>(y);
  const auto d = static_cast<double>(x.d());
  const auto m = static_cast<double>(x.n());
  const auto n = static_cast<double>(y.n());

  const Eigen::MatrixXd kxx = gram(mx, mx, d);
  const Eigen::MatrixXd kyy = gram(my, my, d);
  const Eigen::MatrixXd kxy = gram(mx, my, d);
  const double within_x = (kxx.sum() - kxx.trace()) / (m * (m - 1.0));
  const double within_y = (kyy.sum() - kyy.trace()) / (n * (n - 1.0));
  const double cross = 2.0 * kxy.sum() / (m * n);
  return within_x + within_y - cross;
}

void KidConfig::validate() const {
  if (subsets < 1) throw ConfigError("kid: subsets must be >= 1");
  if (subset_size < 2) throw ConfigError("kid: subset_size must be >= 2");
}

std::vector<std::size_t> kid_round_indices(std::uint64_t seed, std::size_t round,
                                           std::uint64_t stream, std::size_t n, std::size_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(round), static_cast<std::uint32_t>(stream)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return idx;
}

KidResult kid_subsampled(const ActivationSet& x, const ActivationSet& y, const KidConfig& cfg) {
  cfg.validate();
  if (cfg.subset_size > x.n() || cfg.subset_size > y.n()) {
    throw ConfigError("kid: subset_size " + std::to_string(cfg.subset_size) +
                      " exceeds set size (" + std::to_string(x.n()) + ", " +
                      std::to_string(y.n()) + ")");
  }
  if (x.d() != y.d()) throw DimensionError("kid: dimension mismatch");

  KidResult res;
  res.per_subset.assign(cfg.subsets, 0.0);
  auto run_round = [&](std::size_t r) {
    const auto ix = kid_round_indices(cfg.seed, r, 0, x.n(), cfg.subset_size);
    const auto iy = kid_round_indices(cfg.seed, r, 1, y.n(), cfg.subset_size);
    res.per_subset[r] = kid_unbiased(x.select(ix), y.select(iy));
  };

  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, cfg.subsets);
  if (workers == 1) {
    for (std::size_t r = 0; r < cfg.subsets; ++r) run_round(r);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t r = w; r < cfg.subsets; r += workers) run_round(r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const auto k = static_cast<double>(cfg.subsets);
  res.mean = std::accumulate(res.per_subset.begin(), res.per_subset.end(), 0.0) / k;
  if (cfg.subsets == 1) {
    res.std = 0.0;
    res.std_degenerate = true;
  } else {
    double ss = 0.0;
    for (double v : res.per_subset) ss += (v - res.mean) * (v - res.mean);
    res.std = std::sqrt(ss / (k - 1.0));
  }
  return res;
}

BaselineDelta baseline_delta(const ActivationSet& source, const ActivationSet& adapted,
                             const ActivationSet& target, DistMetric metric,
                             const KidConfig& kid_cfg, Precision prec) {
  BaselineDelta out;
  if (metric == DistMetric::Fid) {
    out.baseline = fid(source, target, prec);
    out.adapted = fid(adapted, target, prec);
  } else {
    out.baseline_kid = kid_subsampled(source, target, kid_cfg);
    out.adapted_kid = kid_subsampled(adapted, target, kid_cfg);
    out.baseline = out.baseline_kid.mean;
    out.adapted = out.adapted_kid.mean;
  }
  out.improved = out.adapted < out.baseline;
  return out;
}

}  // namespace imgeval
