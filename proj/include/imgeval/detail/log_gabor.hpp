#pragma once

#include <cstddef>
#include <vector>

namespace imgeval::detail {

struct LogGaborSpec {
  int scales = 1;
  int orientations = 1;
  double min_wavelength = 6.0;
  double scale_factor = 2.0;
  double sigma_on_f = 0.55;
  double angular_sigma = 0.5;
};

/// Real frequency-domain transfer functions laid out in FFT order, one per
/// (scale, orientation), index = scale * orientations + orientation.
/// Orientation o is centred on angle o*pi/orientations; the angular Gaussian
/// is not mirrored, so each filter passes one half-plane and its response
/// to a real image is complex.
std::vector<std::vector<double>> log_gabor_bank(std::size_t rows, std::size_t cols,
                                                const LogGaborSpec& spec);

}  // namespace imgeval::detail
