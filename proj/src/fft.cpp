#include "imgeval/detail/fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "imgeval/error.hpp"

namespace imgeval::detail {

namespace {
// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

void fft2d(ComplexGrid& grid, std::size_t rows, std::size_t cols, bool inverse) {
  if (grid.size() != rows * cols) throw DimensionError("fft2d: grid size mismatch");
  if (grid.empty()) return;
  auto* data = reinterpret_cast<fftw_complex*>(grid.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), data, data,
                            inverse ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(rows * cols);
    for (auto& v : grid) v *= scale;
  }
}

}  // namespace imgeval::detail
