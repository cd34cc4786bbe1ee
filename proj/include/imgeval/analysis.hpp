#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imgeval/image.hpp"
#include "imgeval/report.hpp"

namespace imgeval {

/// Average ranks (1-based); tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

/// Spearman's rho: Pearson correlation of average ranks.
/// Throws DimensionError on length mismatch or fewer than 3 values,
/// FormatError on non-finite input, DegenerateInputError on constant input.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct CorrelationMatrix {
  std::vector<std::string> metrics;
  /// Row-major metrics.size()^2, symmetric, unit diagonal.
  std::vector<double> values;
  /// Rows dropped for each metric pair because a value was infinite.
  std::vector<std::size_t> dropped;

  double at(std::size_t i, std::size_t j) const { return values[i * metrics.size() + j]; }
};

/// Pairwise Spearman over report rows. Rows with a non-finite value in
/// either metric are excluded for that pair only.
/// Throws DimensionError when fewer than 3 rows remain for a pair or the
/// report has fewer than 2 metrics.
CorrelationMatrix correlation_matrix(const MetricReport& r);

/// CSV with a metric-name header row and first column.
std::string correlation_to_csv(const CorrelationMatrix& m);

/// CSV "pair_id,<m1>,<m2>" for plotting. A leading '#' comment notes any
/// infinite values. Throws ConfigError on unknown metric names.
std::string scatter_csv(const MetricReport& r, const std::string& m1, const std::string& m2);
void scatter_export(const MetricReport& r, const std::string& m1, const std::string& m2,
                    const std::filesystem::path& path);

/// Integer translation; positive dx moves content right, positive dy down.
struct Shift {
  int dx = 0;
  int dy = 0;

  bool operator==(const Shift&) const = default;
};

enum class DistortionKind { Shift, Blur, Contrast };

struct DistortionParams {
  Shift shift;
  double sigma = 1.0;   // blur
  double gamma = 1.0;   // contrast
};

/// Translation with zero fill.
Image shift_image(const Image& img, Shift s);

/// Gaussian blur (radius ceil(4 sigma)) with reflective borders.
Image gaussian_blur(const Image& img, double sigma);

/// Shift: zero-filled translation, |dx| < width and |dy| < height.
/// Blur: Gaussian, sigma > 0. Contrast: v^gamma then normalize_unit, gamma > 0.
/// Throws ConfigError on invalid parameters.
Image distort(const Image& img, DistortionKind kind, const DistortionParams& params);

struct Registration {
  Shift shift;
  Image registered;
  /// Normalised cross-power peak height at the chosen shift.
  double peak = 0.0;
};

/// Integer phase correlation on mean-centred, Hann-windowed inputs: the shift
/// applied to `moving` that best aligns it with `fixed`, searched over
/// |dx|,|dy| <= max_shift. Ties prefer the smallest Euclidean norm, then
/// smaller dx, then smaller dy.
/// Throws DimensionError on mismatched shapes, ConfigError when max_shift < 1,
/// DegenerateInputError on constant inputs.
Registration register_translation(const Image& moving, const Image& fixed, int max_shift);

/// Removes `margin` pixels from each side. Throws DimensionError unless both
/// sides exceed 2*margin.
Image crop_border(const Image& img, std::size_t margin);

}  // namespace imgeval
