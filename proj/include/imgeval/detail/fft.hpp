#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace imgeval::detail {

using ComplexGrid = std::vector<std::complex<double>>;

/// In-place 2-D DFT of a row-major rows x cols grid (FFTW, unnormalised).
/// The inverse transform divides by rows*cols so that ifft(fft(x)) == x.
void fft2d(ComplexGrid& grid, std::size_t rows, std::size_t cols, bool inverse);

/// Signed frequency (cycles/sample) of DFT bin k for an n-point transform.
inline double dft_frequency(std::size_t k, std::size_t n) {
  const auto kk = static_cast<double>(k);
  const auto nn = static_cast<double>(n);
  return (k <= n / 2 ? kk : kk - nn) / nn;
}

}  // namespace imgeval::detail
