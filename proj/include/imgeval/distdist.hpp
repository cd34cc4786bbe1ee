#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "imgeval/features.hpp"

namespace imgeval {

enum class Precision { Single, Double };

std::string to_string(Precision p);
/// "f32" / "f64". Throws ConfigError otherwise.
Precision parse_precision(const std::string& s);

/// Gaussian fit of an activation set, held in the scalar type of the
/// precision it was computed in.
template <typename Scalar>
struct GaussianStatsT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cov;
  std::size_t n = 0;

  Eigen::Index dim() const noexcept { return mean.size(); }
};

using GaussianStats = GaussianStatsT<double>;

/// Sample mean and 1/(n-1) covariance, symmetrised as (C + C^T)/2.
/// Throws DegenerateInputError for n < 2.
GaussianStats gaussian_stats(const ActivationSet& a);
GaussianStatsT<float> gaussian_stats_f32(const ActivationSet& a);

/// Principal square root of a symmetric PSD matrix via eigendecomposition;
/// eigenvalues that are negative or below d * eps * max eigenvalue count as 0. Throws ConfigError when `m` is not
/// symmetric within 1e-9 * (1 + max|m|).
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);
Eigen::MatrixXf sqrtm_psd(const Eigen::MatrixXf& m);

/// Residual negative FID values in [-kFidClampTolerance, 0) are reported as 0.
inline constexpr double kFidClampTolerance = 1e-8;

/// Squared Frechet distance between two Gaussians,
///   |mu_a - mu_b|^2 + tr(S_a) + tr(S_b) - 2 tr((S_a^{1/2} S_b S_a^{1/2})^{1/2}).
/// Single precision casts the stats to float and evaluates every step in
/// float. Throws DimensionError on mismatched d.
double fid(const GaussianStats& a, const GaussianStats& b, Precision prec = Precision::Double);
double fid(const GaussianStatsT<float>& a, const GaussianStatsT<float>& b);

/// FID from raw activations, with statistics accumulated in the requested
/// precision as well.
double fid(const ActivationSet& a, const ActivationSet& b, Precision prec = Precision::Double);

/// ((alpha . omega) / d + 1)^3. Throws DimensionError on length mismatch or d = 0.
double poly_kernel(std::span<const double> alpha, std::span<const double> omega);

/// Unbiased MMD^2 estimate under the cubic polynomial kernel; diagonal terms
/// are excluded from the within-set sums, so the value may be negative.
double kid_unbiased(const ActivationSet& x, const ActivationSet& y);

struct KidConfig {
  std::size_t subsets = 50;
  std::size_t subset_size = 100;
  std::uint64_t seed = 0;
  /// Worker threads for the rounds; results do not depend on it.
  std::size_t workers = 1;

  void validate() const;
};

struct KidResult {
  double mean = 0.0;
  /// Sample standard deviation (1/(k-1)) over rounds; 0 when only one round.
  double std = 0.0;
  std::vector<double> per_subset;
  /// Set when std is undefined (a single round) and reported as 0.
  bool std_degenerate = false;
};

/// Subsampled KID: each round draws subset_size rows without replacement
/// from x and, independently, from y, with an RNG seeded from (seed, round).
/// Throws ConfigError when subset_size exceeds either set.
KidResult kid_subsampled(const ActivationSet& x, const ActivationSet& y, const KidConfig& cfg);

/// Row indices drawn for round `round` from a set of `n` rows; `stream`
/// separates the x (0) and y (1) draws.
std::vector<std::size_t> kid_round_indices(std::uint64_t seed, std::size_t round,
                                           std::uint64_t stream, std::size_t n, std::size_t k);

enum class DistMetric { Fid, Kid };

struct BaselineDelta {
  double baseline = 0.0;
  double adapted = 0.0;
  bool improved = false;
  /// Filled for KID only.
  KidResult baseline_kid;
  KidResult adapted_kid;
};

/// metric(source, target) as baseline vs metric(adapted, target); KID uses
/// the subsampled mean. improved = adapted < baseline.
BaselineDelta baseline_delta(const ActivationSet& source, const ActivationSet& adapted,
                             const ActivationSet& target, DistMetric metric,
                             const KidConfig& kid_cfg = {}, Precision prec = Precision::Double);

}  // namespace imgeval
