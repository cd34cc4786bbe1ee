#include "imgeval/fullref.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "imgeval/detail/fft.hpp"
#include "imgeval/detail/log_gabor.hpp"
#include "imgeval/error.hpp"

namespace imgeval {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a.width()) +
                         "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                         "x" + std::to_string(b.height()));
  }
  if (a.empty()) throw DimensionError(std::string(what) + ": empty image");
}

// Separable correlation of a row-major map with `kernel`, keeping only the
// positions where the kernel fits ("valid" mode).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t rows,
                                 std::size_t cols, const std::vector<double>& kernel) {
  const std::size_t k = kernel.size();
  const std::size_t out_rows = rows - k + 1;
  const std::size_t out_cols = cols - k + 1;
  std::vector<double> tmp(rows * out_cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += kernel[i] * src[r * cols + c + i];
      tmp[r * out_cols + c] = acc;
    }
  }
  std::vector<double> out(out_rows * out_cols);
  for (std::size_t r = 0; r < out_rows; ++r) {
    for (std::size_t c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += kernel[i] * tmp[(r + i) * out_cols + c];
      out[r * out_cols + c] = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size));
  const double centre = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - centre;
    w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

detail::ComplexGrid forward_spectrum(const Image& img) {
  detail::ComplexGrid grid(img.pixels().begin(), img.pixels().end());
  detail::fft2d(grid, img.height(), img.width(), false);
  return grid;
}

detail::ComplexGrid filtered_response(const detail::ComplexGrid& spectrum,
                                      const std::vector<double>& filter, std::size_t rows,
                                      std::size_t cols) {
  detail::ComplexGrid out(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum[i] * filter[i];
  detail::fft2d(out, rows, cols, true);
  return out;
}

}  // namespace

void SsimParams::validate() const {
  if (window < 3 || window % 2 == 0) throw ConfigError("ssim window must be odd and >= 3");
  if (!(gaussian_sigma > 0.0)) throw ConfigError("ssim gaussian_sigma must be positive");
  if (!(k1 > 0.0 && k2 > 0.0)) throw ConfigError("ssim k1 and k2 must be positive");
  if (!(data_range > 0.0)) throw ConfigError("ssim data_range must be positive");
}

void CwSsimParams::validate() const {
  if (scales < 1 || orientations < 1) throw ConfigError("cw-ssim needs >= 1 scale and orientation");
  if (window < 1 || window % 2 == 0) throw ConfigError("cw-ssim window must be odd");
  if (!(stabilizer >= 0.0)) throw ConfigError("cw-ssim stabilizer must be non-negative");
  if (!(min_wavelength > 2.0 && scale_factor > 1.0)) {
    throw ConfigError("cw-ssim needs min_wavelength > 2 and scale_factor > 1");
  }
  if (!(sigma_on_f > 0.0 && sigma_on_f < 1.0 && angular_sigma > 0.0)) {
    throw ConfigError("cw-ssim filter bandwidths out of range");
  }
}

void FsimParams::validate() const {
  if (pc_scales < 1 || pc_orientations < 1) throw ConfigError("fsim needs >= 1 scale and orientation");
  if (!(t1 > 0.0 && t2 > 0.0 && epsilon > 0.0)) throw ConfigError("fsim constants must be positive");
  if (!(min_wavelength > 2.0 && scale_factor > 1.0 && theta_sigma_ratio > 0.0)) {
    throw ConfigError("fsim filter geometry out of range");
  }
  if (!(sigma_on_f > 0.0 && sigma_on_f < 1.0)) throw ConfigError("fsim sigma_on_f out of range");
}

nlohmann::json to_json(const SsimParams& p) {
  return {{"window", p.window}, {"gaussian_sigma", p.gaussian_sigma}, {"k1", p.k1},
          {"k2", p.k2}, {"data_range", p.data_range}};
}

nlohmann::json to_json(const CwSsimParams& p) {
  return {{"scales", p.scales},
          {"orientations", p.orientations},
          {"window", p.window},
          {"stabilizer", p.stabilizer},
          {"min_wavelength", p.min_wavelength},
          {"scale_factor", p.scale_factor},
          {"sigma_on_f", p.sigma_on_f},
          {"angular_sigma", p.angular_sigma},
          {"filter_bank", "log-Gabor, FFT domain, circular boundary"}};
}

nlohmann::json to_json(const FsimParams& p) {
  return {{"pc_scales", p.pc_scales},
          {"pc_orientations", p.pc_orientations},
          {"t1", p.t1},
          {"t2", p.t2},
          {"min_wavelength", p.min_wavelength},
          {"scale_factor", p.scale_factor},
          {"sigma_on_f", p.sigma_on_f},
          {"theta_sigma_ratio", p.theta_sigma_ratio},
          {"epsilon", p.epsilon},
          {"phase_congruency", "local energy / summed amplitude, no noise compensation"},
          {"internal_range", 255}};
}

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

double psnr(const Image& a, const Image& b, double data_range) {
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(data_range * data_range / err);
}

double ssim(const Image& a, const Image& b, const SsimParams& p) {
  p.validate();
  require_same_shape(a, b, "ssim");
  const auto win = static_cast<std::size_t>(p.window);
  if (a.width() < win || a.height() < win) {
    throw DimensionError("ssim: image " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " smaller than window " +
                         std::to_string(p.window));
  }
  const std::size_t rows = a.height();
  const std::size_t cols = a.width();
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::vector<double> xa(pa.begin(), pa.end());
  std::vector<double> xb(pb.begin(), pb.end());
  std::vector<double> aa(xa.size()), bb(xa.size()), ab(xa.size());
  for (std::size_t i = 0; i < xa.size(); ++i) {
    aa[i] = xa[i] * xa[i];
    bb[i] = xb[i] * xb[i];
    ab[i] = xa[i] * xb[i];
  }
  const auto kernel = gaussian_kernel(p.window, p.gaussian_sigma);
  const auto mu_a = filter_valid(xa, rows, cols, kernel);
  const auto mu_b = filter_valid(xb, rows, cols, kernel);
  const auto e_aa = filter_valid(aa, rows, cols, kernel);
  const auto e_bb = filter_valid(bb, rows, cols, kernel);
  const auto e_ab = filter_valid(ab, rows, cols, kernel);

  const double c1 = (p.k1 * p.data_range) * (p.k1 * p.data_range);
  const double c2 = (p.k2 * p.data_range) * (p.k2 * p.data_range);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    const double num = (2.0 * (ma * mb) + c1) * (2.0 * cov + c2);
    const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
    acc += num / den;
  }
  return acc / static_cast<double>(mu_a.size());
}

double cw_ssim(const Image& a, const Image& b, const CwSsimParams& p) {
  p.validate();
  require_same_shape(a, b, "cw_ssim");
  const auto win = static_cast<std::size_t>(p.window);
  const std::size_t rows = a.height();
  const std::size_t cols = a.width();
  if (rows < win || cols < win) throw DimensionError("cw_ssim: image smaller than window");

  const detail::LogGaborSpec spec{p.scales, p.orientations, p.min_wavelength, p.scale_factor,
                                  p.sigma_on_f, p.angular_sigma};
  const auto bank = detail::log_gabor_bank(rows, cols, spec);
  const auto spec_a = forward_spectrum(a);
  const auto spec_b = forward_spectrum(b);
  const std::vector<double> box(win, 1.0);

  double acc = 0.0;
  std::size_t count = 0;
  for (const auto& filter : bank) {
    const auto ca = filtered_response(spec_a, filter, rows, cols);
    const auto cb = filtered_response(spec_b, filter, rows, cols);
    std::vector<double> cross_re(ca.size()), cross_im(ca.size()), pow_a(ca.size()), pow_b(ca.size());
    for (std::size_t i = 0; i < ca.size(); ++i) {
      const double ar = ca[i].real(), ai = ca[i].imag();
      const double br = cb[i].real(), bi = cb[i].imag();
      // c_a * conj(c_b), written out so that a == b gives an exactly real product.
      cross_re[i] = ar * br + ai * bi;
      cross_im[i] = ai * br - ar * bi;
      pow_a[i] = ar * ar + ai * ai;
      pow_b[i] = br * br + bi * bi;
    }
    const auto s_re = filter_valid(cross_re, rows, cols, box);
    const auto s_im = filter_valid(cross_im, rows, cols, box);
    const auto s_a = filter_valid(pow_a, rows, cols, box);
    const auto s_b = filter_valid(pow_b, rows, cols, box);
    for (std::size_t i = 0; i < s_re.size(); ++i) {
      const double num = 2.0 * std::hypot(s_re[i], s_im[i]) + p.stabilizer;
      const double den = s_a[i] + s_b[i] + p.stabilizer;
      acc += num / den;
    }
    count += s_re.size();
  }
  return acc / static_cast<double>(count);
}

Image phase_congruency(const Image& img, const FsimParams& p) {
  p.validate();
  const std::size_t rows = img.height();
  const std::size_t cols = img.width();
  const detail::LogGaborSpec spec{p.pc_scales, p.pc_orientations, p.min_wavelength,
                                  p.scale_factor, p.sigma_on_f,
                                  std::numbers::pi / p.pc_orientations / p.theta_sigma_ratio};
  const auto bank = detail::log_gabor_bank(rows, cols, spec);
  const auto spectrum = forward_spectrum(img);

  const std::size_t n = rows * cols;
  std::vector<double> energy(n, 0.0);
  std::vector<double> amplitude(n, 0.0);
  for (int o = 0; o < p.pc_orientations; ++o) {
    std::vector<double> sum_re(n, 0.0), sum_im(n, 0.0);
    for (int s = 0; s < p.pc_scales; ++s) {
      const auto& filter = bank[static_cast<std::size_t>(s * p.pc_orientations + o)];
      const auto e = filtered_response(spectrum, filter, rows, cols);
      for (std::size_t i = 0; i < n; ++i) {
        sum_re[i] += e[i].real();
        sum_im[i] += e[i].imag();
        amplitude[i] += std::abs(e[i]);
      }
    }
    for (std::size_t i = 0; i < n; ++i) energy[i] += std::hypot(sum_re[i], sum_im[i]);
  }

  Image pc(cols, rows, 0.0);
  auto dst = pc.pixels();
  for (std::size_t i = 0; i < n; ++i) dst[i] = energy[i] / (amplitude[i] + p.epsilon);
  return pc;
}

Image gradient_magnitude(const Image& img) {
  const std::size_t rows = img.height();
  const std::size_t cols = img.width();
  // Scharr weights / 16, applied as a correlation with zero padding.
  static constexpr double smooth[3] = {3.0 / 16.0, 10.0 / 16.0, 3.0 / 16.0};
  auto at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || r >= static_cast<std::ptrdiff_t>(rows) ||
        c >= static_cast<std::ptrdiff_t>(cols)) {
      return 0.0;
    }
    return img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  Image out(cols, rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto rr = static_cast<std::ptrdiff_t>(r);
      const auto cc = static_cast<std::ptrdiff_t>(c);
      double gx = 0.0;
      double gy = 0.0;
      for (std::ptrdiff_t k = -1; k <= 1; ++k) {
        const double w = smooth[k + 1];
        gx += w * (at(rr + k, cc - 1) - at(rr + k, cc + 1));
        gy += w * (at(rr - 1, cc + k) - at(rr + 1, cc + k));
      }
      out(r, c) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return out;
}

double fsim(const Image& a, const Image& b, const FsimParams& p) {
  p.validate();
  require_same_shape(a, b, "fsim");
  auto to_255 = [](const Image& img) {
    Image out = img;
    for (double& v : out.pixels()) v *= 255.0;
    return out;
  };
  const Image a255 = to_255(a);
  const Image b255 = to_255(b);
  const Image pc_a = phase_congruency(a255, p);
  const Image pc_b = phase_congruency(b255, p);
  const Image g_a = gradient_magnitude(a255);
  const Image g_b = gradient_magnitude(b255);

  double weighted = 0.0;
  double weight_sum = 0.0;
  double plain = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double pa = pc_a.pixels()[i];
    const double pb = pc_b.pixels()[i];
    const double ga = g_a.pixels()[i];
    const double gb = g_b.pixels()[i];
    const double s_pc = (2.0 * (pa * pb) + p.t1) / (pa * pa + pb * pb + p.t1);
    const double s_g = (2.0 * (ga * gb) + p.t2) / (ga * ga + gb * gb + p.t2);
    const double pc_m = std::max(pa, pb);
    weighted += s_pc * s_g * pc_m;
    weight_sum += pc_m;
    plain += s_pc * s_g;
  }
  // Flat inputs have no phase congruency anywhere; fall back to the
  // unweighted mean of the similarity map.
  if (weight_sum == 0.0) return plain / static_cast<double>(n);
  return weighted / weight_sum;
}

}  // namespace imgeval
