#include "imgeval/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <tuple>

#include "imgeval/detail/fft.hpp"
#include "imgeval/error.hpp"
#include "imgeval/fileio.hpp"

namespace imgeval {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DimensionError("spearman: length mismatch");
  if (xs.size() < 3) throw DimensionError("spearman: need at least 3 values");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw FormatError("spearman: non-finite value");
    }
  }
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateInputError("spearman: undefined for constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const MetricReport& r) {
  const std::size_t k = r.metrics.size();
  if (k < 2) throw DimensionError("correlation_matrix: need at least 2 metrics");
  CorrelationMatrix out;
  out.metrics = r.metrics;
  out.values.assign(k * k, 0.0);
  out.dropped.assign(k * k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    out.values[i * k + i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      std::vector<double> xs, ys;
      std::size_t dropped = 0;
      for (const auto& row : r.rows) {
        if (std::isfinite(row.values[i]) && std::isfinite(row.values[j])) {
          xs.push_back(row.values[i]);
          ys.push_back(row.values[j]);
        } else {
          ++dropped;
        }
      }
      if (xs.size() < 3) {
        throw DimensionError("correlation_matrix: fewer than 3 finite rows for " + r.metrics[i] +
                             " vs " + r.metrics[j] + " (" + std::to_string(dropped) + " dropped)");
      }
      const double rho = spearman(xs, ys);
      out.values[i * k + j] = out.values[j * k + i] = rho;
      out.dropped[i * k + j] = out.dropped[j * k + i] = dropped;
    }
  }
  return out;
}

std::string correlation_to_csv(const CorrelationMatrix& m) {
  std::string out = "metric";
  for (const auto& name : m.metrics) out += "," + name;
  out += "\n";
  for (std::size_t i = 0; i < m.metrics.size(); ++i) {
    out += m.metrics[i];
    for (std::size_t j = 0; j < m.metrics.size(); ++j) out += "," + format_value(m.at(i, j));
    out += "\n";
  }
  return out;
}

std::string scatter_csv(const MetricReport& r, const std::string& m1, const std::string& m2) {
  const std::size_t c1 = r.column(m1);
  const std::size_t c2 = r.column(m2);
  std::size_t inf1 = 0, inf2 = 0;
  for (const auto& row : r.rows) {
    inf1 += std::isfinite(row.values[c1]) ? 0 : 1;
    inf2 += std::isfinite(row.values[c2]) ? 0 : 1;
  }
  std::string out;
  if (inf1 + inf2 > 0) {
    out += "# infinite values: " + m1 + "=" + std::to_string(inf1) + " " + m2 + "=" +
           std::to_string(inf2) + " (written as inf)\n";
  }
  out += "pair_id," + m1 + "," + m2 + "\n";
  for (const auto& row : r.rows) {
    out += row.pair_id + "," + format_value(row.values[c1]) + "," + format_value(row.values[c2]) + "\n";
  }
  return out;
}

void scatter_export(const MetricReport& r, const std::string& m1, const std::string& m2,
                    const std::filesystem::path& path) {
  write_file_atomic(path, scatter_csv(r, m1, m2));
}

Image shift_image(const Image& img, Shift s) {
  Image out(img.width(), img.height(), 0.0);
  out.meta() = img.meta();
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    const std::ptrdiff_t src_r = r - s.dy;
    if (src_r < 0 || src_r >= h) continue;
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      const std::ptrdiff_t src_c = c - s.dx;
      if (src_c < 0 || src_c >= w) continue;
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) =
          img(static_cast<std::size_t>(src_r), static_cast<std::size_t>(src_c));
    }
  }
  return out;
}

namespace {

// Half-sample symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - 1 - i);
}

}  // namespace

Image gaussian_blur(const Image& img, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("blur sigma must be positive");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  Image tmp(img.width(), img.height(), 0.0);
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               img(static_cast<std::size_t>(r), reflect_index(c + k, w));
      }
      tmp(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  }
  Image out(img.width(), img.height(), 0.0);
  out.meta() = img.meta();
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               tmp(reflect_index(r + k, h), static_cast<std::size_t>(c));
      }
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
    }
  }
  return out;
}

Image distort(const Image& img, DistortionKind kind, const DistortionParams& params) {
  switch (kind) {
    case DistortionKind::Shift: {
      const auto w = static_cast<long>(img.width());
      const auto h = static_cast<long>(img.height());
      if (std::abs(params.shift.dx) >= w || std::abs(params.shift.dy) >= h) {
        throw ConfigError("shift exceeds image bounds");
      }
      return shift_image(img, params.shift);
    }
    case DistortionKind::Blur:
      return gaussian_blur(img, params.sigma);
    case DistortionKind::Contrast: {
      if (!(params.gamma > 0.0)) throw ConfigError("contrast gamma must be positive");
      Image out = img;
      for (double& v : out.pixels()) v = std::pow(std::max(v, 0.0), params.gamma);
      return normalize_unit(out);
    }
  }
  throw ConfigError("unknown distortion kind");
}

Registration register_translation(const Image& moving, const Image& fixed, int max_shift) {
  if (!moving.same_shape(fixed)) throw DimensionError("register_translation: dimension mismatch");
  if (max_shift < 1) throw ConfigError("register_translation: max_shift must be >= 1");
  if (moving.empty()) throw DimensionError("register_translation: empty image");
  auto is_constant = [](const Image& img) {
    const auto px = img.pixels();
    const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
    return *lo == *hi;
  };
  if (is_constant(moving) || is_constant(fixed)) {
    throw DegenerateInputError("register_translation: constant image");
  }

  const std::size_t rows = fixed.height();
  const std::size_t cols = fixed.width();
  // Mean-centred and Hann-windowed, so the periodic wrap edge (shared by both
  // images at zero shift) does not compete with the true peak.
  auto hann = [](std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
    }
    return w;
  };
  const auto win_r = hann(rows);
  const auto win_c = hann(cols);
  auto centred = [&](const Image& img) {
    const auto px = img.pixels();
    const double mean = std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(px.size());
    detail::ComplexGrid g(px.size());
    for (std::size_t i = 0; i < px.size(); ++i) g[i] = (px[i] - mean) * (win_r[i / cols] * win_c[i % cols]);
    return g;
  };
  detail::ComplexGrid f = centred(fixed);
  detail::ComplexGrid m = centred(moving);
  detail::fft2d(f, rows, cols, false);
  detail::fft2d(m, rows, cols, false);
  detail::ComplexGrid cross(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto p = f[i] * std::conj(m[i]);
    const double mag = std::abs(p);
    cross[i] = mag > 1e-15 ? p / mag : std::complex<double>{};
  }
  detail::fft2d(cross, rows, cols, true);

  const int limit_x = std::min<int>(max_shift, static_cast<int>(cols) - 1);
  const int limit_y = std::min<int>(max_shift, static_cast<int>(rows) - 1);
  Shift best;
  double best_peak = -std::numeric_limits<double>::infinity();
  auto tie_key = [](Shift s) { return std::tuple{s.dx * s.dx + s.dy * s.dy, s.dx, s.dy}; };
  for (int dy = -limit_y; dy <= limit_y; ++dy) {
    const auto r = static_cast<std::size_t>((dy + static_cast<long>(rows)) % static_cast<long>(rows));
    for (int dx = -limit_x; dx <= limit_x; ++dx) {
      const auto c = static_cast<std::size_t>((dx + static_cast<long>(cols)) % static_cast<long>(cols));
      const double v = cross[r * cols + c].real();
      const Shift s{dx, dy};
      if (v > best_peak || (v == best_peak && tie_key(s) < tie_key(best))) {
        best_peak = v;
        best = s;
      }
    }
  }
  Registration reg;
  reg.shift = best;
  reg.peak = best_peak;
  reg.registered = shift_image(moving, best);
  return reg;
}

Image crop_border(const Image& img, std::size_t margin) {
  if (img.width() <= 2 * margin || img.height() <= 2 * margin) {
    throw DimensionError("crop_border: image " + std::to_string(img.width()) + "x" +
                         std::to_string(img.height()) + " too small for margin " +
                         std::to_string(margin));
  }
  const std::size_t w = img.width() - 2 * margin;
  const std::size_t h = img.height() - 2 * margin;
  Image out(w, h, 0.0);
  out.meta() = img.meta();
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) out(r, c) = img(r + margin, c + margin);
  }
  return out;
}

}  // namespace imgeval
