#include "imgeval/detail/log_gabor.hpp"

#include <cmath>
#include <numbers>

#include "imgeval/detail/fft.hpp"

namespace imgeval::detail {

std::vector<std::vector<double>> log_gabor_bank(std::size_t rows, std::size_t cols,
                                                const LogGaborSpec& spec) {
  const std::size_t n = rows * cols;
  std::vector<double> radius(n);
  std::vector<double> theta(n);
  for (std::size_t r = 0; r < rows; ++r) {
    const double fy = dft_frequency(r, rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double fx = dft_frequency(c, cols);
      radius[r * cols + c] = std::hypot(fx, fy);
      // Image rows grow downwards; flip so angles are counter-clockwise.
      theta[r * cols + c] = std::atan2(-fy, fx);
    }
  }

  const double log_sigma = std::log(spec.sigma_on_f);
  const double two_log_sigma_sq = 2.0 * log_sigma * log_sigma;
  const double two_ang_sq = 2.0 * spec.angular_sigma * spec.angular_sigma;

  std::vector<std::vector<double>> bank;
  bank.reserve(static_cast<std::size_t>(spec.scales * spec.orientations));
  double wavelength = spec.min_wavelength;
  for (int s = 0; s < spec.scales; ++s) {
    const double f0 = 1.0 / wavelength;
    std::vector<double> radial(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = radius[i];
      if (f == 0.0) continue;
      const double lg = std::log(f / f0);
      // Butterworth low-pass (cutoff 0.45, order 15) suppresses the corners.
      const double lowpass = 1.0 / (1.0 + std::pow(f / 0.45, 30.0));
      radial[i] = std::exp(-lg * lg / two_log_sigma_sq) * lowpass;
    }
    for (int o = 0; o < spec.orientations; ++o) {
      const double angle = o * std::numbers::pi / spec.orientations;
      std::vector<double> filter(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = std::remainder(theta[i] - angle, 2.0 * std::numbers::pi);
        filter[i] = radial[i] * std::exp(-d * d / two_ang_sq);
      }
      bank.push_back(std::move(filter));
    }
    wavelength *= spec.scale_factor;
  }
  return bank;
}

}  // namespace imgeval::detail
