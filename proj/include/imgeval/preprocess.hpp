#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "imgeval/image.hpp"

namespace imgeval {

/// Patch extraction and canvas geometry.
struct PipelineConfig {
  std::size_t patch_size = 256;
  std::size_t step = 246;
  double nonzero_frac = 0.99;
  std::size_t canvas = 2224;
  /// Otsu segmentation is skipped for sources that arrive already segmented.
  bool segment = true;

  /// Throws ConfigError unless 0 < step <= patch_size <= canvas and
  /// 0 < nonzero_frac <= 1.
  void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);

struct Patch {
  Image data;
  std::size_t row = 0;
  std::size_t col = 0;
  std::string source_id;

  /// <source_id>_r<row>_c<col>
  std::string file_stem() const;
};

struct OtsuResult {
  /// Pixels strictly above this intensity are foreground.
  double threshold = 0.0;
  /// Index of the last histogram bin assigned to the background class.
  int bin = 0;
  /// Row-major, 1 = foreground.
  std::vector<unsigned char> mask;
};

/// Number of bins of the Otsu histogram. Bin k covers (k/256, (k+1)/256],
/// with bin 0 also holding exact zeros; values outside [0,1] are clamped.
inline constexpr int kOtsuBins = 256;

/// Histogram bin of an intensity under the Otsu binning above.
int otsu_bin(double v);

/// Threshold maximising between-class variance of the 256-bin histogram.
/// Ties resolve to the floor of the mean of the maximising bin indices.
/// If no split separates anything (fewer than two occupied bins) the
/// threshold is the maximum intensity and the mask is empty.
OtsuResult otsu_threshold(const Image& img);

/// Otsu segmentation with background set to the display-black value: 0 for
/// MONOCHROME2/unknown images, 1 for MONOCHROME1 images (whose tissue is the
/// darker class and whose background becomes 0 after inversion).
Image segment_background(const Image& img);

/// MONOCHROME1 -> 1 - v and relabel as MONOCHROME2; identity otherwise.
Image invert_monochrome1(const Image& img);

/// Right laterality -> horizontal mirror and relabel as Left; identity otherwise.
Image flip_right_laterality(const Image& img);

/// Zero-pads to canvas x canvas with the content anchored top-left.
/// Throws DimensionError if the image exceeds the canvas.
Image pad_to_canvas(const Image& img, const PipelineConfig& cfg);

/// Sliding-window patches on the step lattice, kept when the fraction of
/// strictly positive pixels is at least cfg.nonzero_frac.
std::vector<Patch> extract_patches(const Image& img, const PipelineConfig& cfg);

/// 256-level histogram equalisation on the patch's own histogram followed by
/// affine renormalisation to [0,1]. Constant patches are returned unchanged.
Patch hist_equalize(const Patch& p);

/// segment -> invert -> flip -> normalise -> pad -> patch -> equalise.
/// (Equalised patches are already renormalised to [0,1].)
std::vector<Patch> run_pipeline(const Image& img, const PipelineConfig& cfg);

/// Writes every patch as <stem>.png into `dir` plus a manifest.json listing
/// origins and the effective configuration.
void write_patch_set(const std::vector<Patch>& patches, const PipelineConfig& cfg,
                     const std::filesystem::path& dir, int bit_depth = 16);

}  // namespace imgeval
