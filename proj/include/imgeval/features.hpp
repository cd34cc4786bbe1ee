#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imgeval/image.hpp"

namespace imgeval {

/// n feature vectors of dimension d, one per image, from one extractor.
class ActivationSet {
 public:
  ActivationSet() = default;
  /// Throws DimensionError if rows.size() != n*d, FormatError on non-finite values.
  ActivationSet(std::size_t n, std::size_t d, std::vector<double> rows,
                std::string extractor_id = {});

  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * d_, d_};
  }
  std::span<const double> data() const noexcept { return data_; }
  const std::string& extractor_id() const noexcept { return extractor_id_; }

  /// Rows at `indices`, in that order.
  ActivationSet select(std::span<const std::size_t> indices) const;

  bool operator==(const ActivationSet&) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> data_;
  std::string extractor_id_;
};

/// Loads a 2-D NPY (n, d) of <f4 or <f8; float32 is widened to double.
ActivationSet load_activations(const std::filesystem::path& path);

void write_activations(const ActivationSet& acts, const std::filesystem::path& path);

/// Deterministic stand-in extractor: 16x16 area-average downsample, flatten,
/// project to d dims with a seed-derived Gaussian matrix (scaled by 1/16),
/// then rectify with max(0, .). Throws DegenerateInputError on empty input
/// and DimensionError on mixed image sizes.
ActivationSet toy_extract(std::span<const Image> images, std::uint64_t seed, std::size_t d);

/// Feature maps of one layer for every image: n x channels x height x width.
struct LayerActivations {
  std::string name;
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> maps;
  /// Per-channel texture (alpha) and structure (beta) weights.
  std::vector<double> alpha;
  std::vector<double> beta;

  std::size_t map_size() const noexcept { return height * width; }
  std::size_t image_stride() const noexcept { return channels * map_size(); }
};

/// Multi-layer activations for a batch of images, as described by a
/// manifest.json next to one NPY per layer.
struct MultiLayerActivations {
  std::vector<std::string> images;
  std::vector<LayerActivations> layers;
  std::string extractor_id;

  std::size_t count() const noexcept { return images.size(); }
  /// Index of an image by file name; throws DimensionError if absent.
  std::size_t index_of(const std::string& image) const;
  /// Throws MetadataError unless shapes agree, weights are non-negative and
  /// sum(alpha + beta) over all layers and channels equals 1 within 1e-6.
  void validate() const;
};

/// manifest.json:
/// {"extractor_id": str, "images": [file names],
///  "layers": [{"name", "file", "channels", "height", "width",
///              "alpha": [channels], "beta": [channels]}]}
MultiLayerActivations load_multilayer(const std::filesystem::path& dir);
void write_multilayer(const MultiLayerActivations& acts, const std::filesystem::path& dir);

inline constexpr double kDistsC1 = 1e-6;
inline constexpr double kDistsC2 = 1e-6;

/// DISTS between image `i` of `x` and image `j` of `y`, using the weights of
/// `x`. Population spatial moments; result clamped to [0,1].
/// Throws DimensionError on layer shape mismatch and MetadataError when the
/// weight tables of the two sets disagree.
double dists(const MultiLayerActivations& x, std::size_t i, const MultiLayerActivations& y,
             std::size_t j);

}  // namespace imgeval
