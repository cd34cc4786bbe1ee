#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace imgeval {

enum class Photometric { Monochrome1, Monochrome2, Unknown };
enum class Laterality { Left, Right, Unknown };

struct ImageMeta {
  Photometric photometric = Photometric::Unknown;
  Laterality laterality = Laterality::Unknown;
  std::string source_id;

  bool operator==(const ImageMeta&) const = default;
};

/// Single-channel raster, row-major, double precision. Intensities are
/// nominally in [0,1]; only normalize_unit guarantees that range.
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, double fill = 0.0);
  Image(std::size_t width, std::size_t height, std::vector<double> data,
        ImageMeta meta = {});

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * width_ + col];
  }
  double& operator()(std::size_t row, std::size_t col) noexcept {
    return data_[row * width_ + col];
  }

  std::span<const double> pixels() const noexcept { return data_; }
  std::span<double> pixels() noexcept { return data_; }

  const ImageMeta& meta() const noexcept { return meta_; }
  ImageMeta& meta() noexcept { return meta_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
  ImageMeta meta_;
};

std::string to_string(Photometric p);
std::string to_string(Laterality l);

/// Reads an 8- or 16-bit single-channel PNG, scaling by the bit-depth maximum.
/// When `sidecar` is given, metadata is parsed from that JSON file.
/// Throws IoError, FormatError (multi-channel, not PNG) or MetadataError.
Image read_image(const std::filesystem::path& path,
                 const std::optional<std::filesystem::path>& sidecar = std::nullopt);

/// Parses {"photometric": ..., "laterality": ..., "source_id": ...}.
ImageMeta read_sidecar(const std::filesystem::path& path);

/// Writes a grayscale PNG of the given bit depth (8 or 16). Values are clamped
/// to [0,1] and rounded to the nearest code. The file is written atomically.
void write_image(const Image& img, const std::filesystem::path& path, int bit_depth = 16);

/// Affine rescale to exactly [0,1]. Constant images map to all zeros.
/// Throws DegenerateInputError on an empty image.
Image normalize_unit(const Image& img);

}  // namespace imgeval
