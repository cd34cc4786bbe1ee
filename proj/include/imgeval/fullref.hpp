#pragma once

#include <json.hpp>

#include "imgeval/image.hpp"

namespace imgeval {

struct SsimParams {
  int window = 11;
  double gaussian_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;

  void validate() const;
};

/// Log-Gabor filter bank used by the complex-wavelet SSIM. Filters are
/// one-sided in frequency so each subband is a complex (analytic) signal.
struct CwSsimParams {
  int scales = 2;
  int orientations = 4;
  int window = 7;
  double stabilizer = 1e-4;
  /// Wavelength (pixels) of the finest scale; scale s uses
  /// min_wavelength * scale_factor^s.
  double min_wavelength = 16.0;
  double scale_factor = 2.0;
  /// Ratio of the radial Gaussian (in log-frequency) std to the centre
  /// frequency, log-Gabor convention: closer to 1 is narrower.
  double sigma_on_f = 0.75;
  /// Angular std in radians.
  double angular_sigma = 0.35;

  void validate() const;
};

struct FsimParams {
  int pc_scales = 4;
  int pc_orientations = 4;
  double t1 = 0.85;
  double t2 = 160.0;
  double min_wavelength = 6.0;
  double scale_factor = 2.0;
  double sigma_on_f = 0.55;
  /// Angular std is pi / orientations / this ratio.
  double theta_sigma_ratio = 1.2;
  /// Added to the amplitude sum in the phase congruency denominator.
  double epsilon = 1e-4;

  void validate() const;
};

nlohmann::json to_json(const SsimParams& p);
nlohmann::json to_json(const CwSsimParams& p);
nlohmann::json to_json(const FsimParams& p);

/// Mean squared difference. Throws DimensionError on shape mismatch.
double mse(const Image& a, const Image& b);

/// 10*log10(range^2 / mse); +infinity for identical images.
double psnr(const Image& a, const Image& b, double data_range = 1.0);

/// Gaussian-weighted SSIM averaged over every window position that fits
/// entirely inside the image.
double ssim(const Image& a, const Image& b, const SsimParams& p = {});

/// Complex-wavelet SSIM: per subband and per window,
///   (2|sum c_a conj(c_b)| + K) / (sum |c_a|^2 + sum |c_b|^2 + K),
/// averaged over windows and subbands. Filtering is circular (FFT domain).
double cw_ssim(const Image& a, const Image& b, const CwSsimParams& p = {});

/// Phase congruency map: sum_o |sum_s e_{s,o}| / (sum_o sum_s |e_{s,o}| + eps).
/// The input is used as given; fsim rescales to [0,255] first.
Image phase_congruency(const Image& img, const FsimParams& p = {});

/// Gradient magnitude from 3x3 Scharr kernels (zero padding at the border).
Image gradient_magnitude(const Image& img);

/// FSIM on grayscale inputs rescaled internally to [0,255]. Not clamped:
/// values above 1 are possible and are reported as such.
double fsim(const Image& a, const Image& b, const FsimParams& p = {});

}  // namespace imgeval
