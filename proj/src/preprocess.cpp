#include "imgeval/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "imgeval/error.hpp"
#include "imgeval/fileio.hpp"

namespace imgeval {

void PipelineConfig::validate() const {
  if (step == 0 || step > patch_size) {
    throw ConfigError("step must satisfy 0 < step <= patch_size (step=" + std::to_string(step) +
                      ", patch_size=" + std::to_string(patch_size) + ")");
  }
  if (patch_size > canvas) {
    throw ConfigError("patch_size " + std::to_string(patch_size) + " exceeds canvas " +
                      std::to_string(canvas));
  }
  if (!(nonzero_frac > 0.0 && nonzero_frac <= 1.0)) {
    throw ConfigError("nonzero_frac must lie in (0, 1]");
  }
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  return {{"patch_size", cfg.patch_size},
          {"step", cfg.step},
          {"nonzero_frac", cfg.nonzero_frac},
          {"canvas", cfg.canvas},
          {"segment", cfg.segment},
          {"padding", "top-left, zero fill"},
          {"equalisation_bins", 256},
          {"otsu_bins", kOtsuBins}};
}

std::string Patch::file_stem() const {
  return source_id + "_r" + std::to_string(row) + "_c" + std::to_string(col);
}

int otsu_bin(double v) {
  const double scaled = std::ceil(std::clamp(v, 0.0, 1.0) * kOtsuBins) - 1.0;
  return static_cast<int>(std::clamp(scaled, 0.0, double{kOtsuBins - 1}));
}

OtsuResult otsu_threshold(const Image& img) {
  if (img.empty()) throw DegenerateInputError("otsu_threshold: empty image");
  std::array<std::int64_t, kOtsuBins> hist{};
  for (double v : img.pixels()) ++hist[otsu_bin(v)];

  std::int64_t total_n = 0;
  std::int64_t total_s = 0;
  for (int k = 0; k < kOtsuBins; ++k) {
    total_n += hist[k];
    total_s += hist[k] * k;
  }

  // Between-class variance up to the constant 1/N^2:
  //   (s0*n1 - s1*n0)^2 / (n0*n1)
  // with n = counts and s = sums of bin indices per class.
  std::array<long double, kOtsuBins - 1> score{};
  long double best = 0.0L;
  std::int64_t n0 = 0;
  std::int64_t s0 = 0;
  for (int k = 0; k < kOtsuBins - 1; ++k) {
    n0 += hist[k];
    s0 += hist[k] * k;
    const std::int64_t n1 = total_n - n0;
    const std::int64_t s1 = total_s - s0;
    if (n0 == 0 || n1 == 0) continue;
    const __int128 diff = static_cast<__int128>(s0) * n1 - static_cast<__int128>(s1) * n0;
    score[k] = static_cast<long double>(diff * diff) /
               (static_cast<long double>(n0) * static_cast<long double>(n1));
    best = std::max(best, score[k]);
  }

  OtsuResult res;
  res.mask.assign(img.size(), 0);
  if (best <= 0.0L) {
    const auto px = img.pixels();
    res.threshold = *std::max_element(px.begin(), px.end());
    res.bin = otsu_bin(res.threshold);
    return res;
  }

  std::int64_t index_sum = 0;
  std::int64_t count = 0;
  for (int k = 0; k < kOtsuBins - 1; ++k) {
    if (score[k] >= best * (1.0L - 1e-12L)) {
      index_sum += k;
      ++count;
    }
  }
  res.bin = static_cast<int>(index_sum / count);
  res.threshold = static_cast<double>(res.bin + 1) / kOtsuBins;
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) res.mask[i] = px[i] > res.threshold ? 1 : 0;
  return res;
}

Image segment_background(const Image& img) {
  const OtsuResult otsu = otsu_threshold(img);
  Image out = img;
  auto px = out.pixels();
  if (img.meta().photometric == Photometric::Monochrome1) {
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (otsu.mask[i]) px[i] = 1.0;
    }
  } else {
    for (std::size_t i = 0; i < px.size(); ++i) {
      if (!otsu.mask[i]) px[i] = 0.0;
    }
  }
  return out;
}

Image invert_monochrome1(const Image& img) {
  if (img.meta().photometric != Photometric::Monochrome1) return img;
  Image out = img;
  for (double& v : out.pixels()) v = 1.0 - v;
  out.meta().photometric = Photometric::Monochrome2;
  return out;
}

Image flip_right_laterality(const Image& img) {
  if (img.meta().laterality != Laterality::Right) return img;
  Image out = img;
  const std::size_t w = img.width();
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < w; ++c) out(r, c) = img(r, w - 1 - c);
  }
  out.meta().laterality = Laterality::Left;
  return out;
}

Image pad_to_canvas(const Image& img, const PipelineConfig& cfg) {
  if (img.width() > cfg.canvas || img.height() > cfg.canvas) {
    throw DimensionError("image " + std::to_string(img.width()) + "x" +
                         std::to_string(img.height()) + " exceeds canvas " +
                         std::to_string(cfg.canvas));
  }
  Image out(cfg.canvas, cfg.canvas, 0.0);
  out.meta() = img.meta();
  for (std::size_t r = 0; r < img.height(); ++r) {
    std::copy_n(img.pixels().begin() + static_cast<std::ptrdiff_t>(r * img.width()), img.width(),
                out.pixels().begin() + static_cast<std::ptrdiff_t>(r * cfg.canvas));
  }
  return out;
}

std::vector<Patch> extract_patches(const Image& img, const PipelineConfig& cfg) {
  cfg.validate();
  std::vector<Patch> patches;
  const std::size_t ps = cfg.patch_size;
  if (img.width() < ps || img.height() < ps) return patches;
  const double area = static_cast<double>(ps * ps);

  for (std::size_t r = 0; r + ps <= img.height(); r += cfg.step) {
    for (std::size_t c = 0; c + ps <= img.width(); c += cfg.step) {
      std::size_t nonzero = 0;
      for (std::size_t i = 0; i < ps; ++i) {
        for (std::size_t j = 0; j < ps; ++j) nonzero += img(r + i, c + j) > 0.0 ? 1 : 0;
      }
      if (static_cast<double>(nonzero) / area < cfg.nonzero_frac) continue;

      Patch p;
      p.row = r;
      p.col = c;
      p.source_id = img.meta().source_id;
      p.data = Image(ps, ps, 0.0);
      p.data.meta() = img.meta();
      for (std::size_t i = 0; i < ps; ++i) {
        for (std::size_t j = 0; j < ps; ++j) p.data(i, j) = img(r + i, c + j);
      }
      patches.push_back(std::move(p));
    }
  }
  return patches;
}

Patch hist_equalize(const Patch& p) {
  constexpr int levels = 256;
  const auto px = p.data.pixels();
  if (px.empty()) return p;

  std::vector<int> level(px.size());
  std::array<std::int64_t, levels> hist{};
  for (std::size_t i = 0; i < px.size(); ++i) {
    level[i] = static_cast<int>(std::lround(std::clamp(px[i], 0.0, 1.0) * (levels - 1)));
    ++hist[level[i]];
  }
  std::array<std::int64_t, levels> cdf{};
  std::int64_t run = 0;
  for (int k = 0; k < levels; ++k) {
    run += hist[k];
    cdf[k] = run;
  }
  const auto n = static_cast<std::int64_t>(px.size());
  const std::int64_t cdf_min = *std::find_if(cdf.begin(), cdf.end(), [](auto v) { return v > 0; });
  if (cdf_min == n) return p;

  Patch out = p;
  auto dst = out.data.pixels();
  const double denom = static_cast<double>(n - cdf_min);
  for (std::size_t i = 0; i < px.size(); ++i) {
    dst[i] = static_cast<double>(cdf[level[i]] - cdf_min) / denom;
  }
  out.data = normalize_unit(out.data);
  return out;
}

std::vector<Patch> run_pipeline(const Image& img, const PipelineConfig& cfg) {
  cfg.validate();
  Image work = cfg.segment ? segment_background(img) : img;
  work = invert_monochrome1(work);
  work = flip_right_laterality(work);
  work = normalize_unit(work);
  work = pad_to_canvas(work, cfg);
  std::vector<Patch> patches = extract_patches(work, cfg);
  for (auto& p : patches) p = hist_equalize(p);
  return patches;
}

void write_patch_set(const std::vector<Patch>& patches, const PipelineConfig& cfg,
                     const std::filesystem::path& dir, int bit_depth) {
  std::filesystem::create_directories(dir);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& p : patches) {
    const std::string file = p.file_stem() + ".png";
    write_image(p.data, dir / file, bit_depth);
    entries.push_back({{"file", file}, {"source_id", p.source_id}, {"row", p.row}, {"col", p.col}});
  }
  nlohmann::json manifest = {{"config", to_json(cfg)},
                             {"bit_depth", bit_depth},
                             {"patch_count", patches.size()},
                             {"patches", entries}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace imgeval
