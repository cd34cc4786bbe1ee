#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "imgeval/features.hpp"
#include "imgeval/image.hpp"
#include "imgeval/report.hpp"

// Straightforward reference implementations used as test oracles.
namespace imgeval::testing {

struct OracleOtsu {
  int bin = -1;  // -1: no separating split
  double threshold = 0.0;
};

// Exhaustive search: every split k puts bins 0..k in the background. Bin k
// holds (k/256, (k+1)/256], found here by scanning the bin edges.
inline OracleOtsu otsu_oracle(const Image& img) {
  std::vector<double> hist(256, 0.0);
  for (double v : img.pixels()) {
    const double c = std::clamp(v, 0.0, 1.0);
    int k = 0;
    while (k < 255 && c > (k + 1) / 256.0) ++k;
    hist[k] += 1.0;
  }
  const double n = static_cast<double>(img.size());
  std::vector<double> score(255, -1.0);
  double best = 0.0;
  for (int k = 0; k < 255; ++k) {
    double w0 = 0, m0 = 0, w1 = 0, m1 = 0;
    for (int i = 0; i <= k; ++i) {
      w0 += hist[i] / n;
      m0 += i * hist[i] / n;
    }
    for (int i = k + 1; i < 256; ++i) {
      w1 += hist[i] / n;
      m1 += i * hist[i] / n;
    }
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double d = m0 / w0 - m1 / w1;
    score[k] = w0 * w1 * d * d;
    best = std::max(best, score[k]);
  }
  OracleOtsu out;
  if (best <= 0.0) return out;
  long sum = 0, count = 0;
  for (int k = 0; k < 255; ++k) {
    if (score[k] >= best * (1.0 - 1e-9)) {
      sum += k;
      ++count;
    }
  }
  out.bin = static_cast<int>(sum / count);
  out.threshold = (out.bin + 1) / 256.0;
  return out;
}

inline Image random_mixture(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> side(4, 48);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t w = side(rng), h = side(rng);
  const double m0 = u(rng), m1 = u(rng), s0 = 0.02 + 0.2 * u(rng), s1 = 0.02 + 0.2 * u(rng);
  const double frac = u(rng);
  std::normal_distribution<double> g0(m0, s0), g1(m1, s1);
  Image img(w, h);
  for (double& v : img.pixels()) v = std::clamp(u(rng) < frac ? g0(rng) : g1(rng), 0.0, 1.0);
  return img;
}

inline double naive_kid(const ActivationSet& x, const ActivationSet& y) {
  auto k = [&](std::span<const double> a, std::span<const double> b) {
    double dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    const double t = dot / double(a.size()) + 1.0;
    return t * t * t;
  };
  const double m = double(x.n()), n = double(y.n());
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = 0; j < x.n(); ++j)
      if (i != j) sxx += k(x.row(i), x.row(j));
  for (std::size_t i = 0; i < y.n(); ++i)
    for (std::size_t j = 0; j < y.n(); ++j)
      if (i != j) syy += k(y.row(i), y.row(j));
  for (std::size_t i = 0; i < x.n(); ++i)
    for (std::size_t j = 0; j < y.n(); ++j) sxy += k(x.row(i), y.row(j));
  return sxx / (m * (m - 1)) + syy / (n * (n - 1)) - 2 * sxy / (m * n);
}


inline std::vector<double> naive_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double naive_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = naive_ranks(x), ry = naive_ranks(y);
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline MetricReport random_report(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  MetricReport r;
  r.metrics = {"psnr", "ssim", "fsim", "cw_ssim", "mse"};
  const int rows = 5 + int(rng() % 40);
  for (int i = 0; i < rows; ++i) {
    std::vector<double> v;
    v.push_back(u(rng) < 0.1 ? std::numeric_limits<double>::infinity() : 10 + 30 * u(rng));
    for (int m = 1; m < 5; ++m) {
      const double x = u(rng);
      v.push_back(m == 2 ? std::round(x * 5) / 5 : x);  // ties in fsim
    }
    r.add_row("pair" + std::to_string(i), v);
  }
  return r;
}

}  // namespace imgeval::testing
