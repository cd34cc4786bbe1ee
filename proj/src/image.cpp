#include "imgeval/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <system_error>

#include <json.hpp>

#include "imgeval/error.hpp"
#include "imgeval/fileio.hpp"

namespace imgeval {

Image::Image(std::size_t width, std::size_t height, double fill)
    : width_(width), height_(height), data_(width * height, fill) {}

Image::Image(std::size_t width, std::size_t height, std::vector<double> data, ImageMeta meta)
    : width_(width), height_(height), data_(std::move(data)), meta_(std::move(meta)) {
  if (data_.size() != width_ * height_) {
    throw DimensionError("image data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(width_) + "x" +
                         std::to_string(height_));
  }
}

std::string to_string(Photometric p) {
  switch (p) {
    case Photometric::Monochrome1: return "MONOCHROME1";
    case Photometric::Monochrome2: return "MONOCHROME2";
    case Photometric::Unknown: break;
  }
  return "UNKNOWN";
}

std::string to_string(Laterality l) {
  switch (l) {
    case Laterality::Left: return "L";
    case Laterality::Right: return "R";
    case Laterality::Unknown: break;
  }
  return "UNKNOWN";
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngRaw {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  std::vector<unsigned char> bytes;
  std::size_t row_bytes = 0;
};

void on_png_error(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<char*>(png_get_error_ptr(png));
  std::snprintf(buf, 256, "%s", msg);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// Only POD locals live in this frame; libpng errors longjmp back here.
bool decode_png(std::FILE* fp, PngRaw* out, char* err) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err, on_png_error, on_png_warning);
  if (png == nullptr) {
    std::snprintf(err, 256, "libpng initialisation failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    std::snprintf(err, 256, "libpng initialisation failed");
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  out->width = png_get_image_width(png, info);
  out->height = png_get_image_height(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->color_type = png_get_color_type(png, info);
  if (out->color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    return true;  // caller reports the channel layout
  }
  if (out->bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  out->row_bytes = png_get_rowbytes(png, info);
  out->bytes.resize(out->row_bytes * out->height);
  for (png_uint_32 r = 0; r < out->height; ++r) {
    png_read_row(png, out->bytes.data() + r * out->row_bytes, nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png(std::FILE* fp, const std::vector<unsigned char>* bytes, png_uint_32 width,
                png_uint_32 height, int bit_depth, char* err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err, on_png_error, on_png_warning);
  if (png == nullptr) {
    std::snprintf(err, 256, "libpng initialisation failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    std::snprintf(err, 256, "libpng initialisation failed");
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * (bit_depth / 8);
  for (png_uint_32 r = 0; r < height; ++r) {
    png_write_row(png, bytes->data() + r * row_bytes);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::string color_type_name(int color_type) {
  switch (color_type) {
    case PNG_COLOR_TYPE_GRAY_ALPHA: return "gray+alpha";
    case PNG_COLOR_TYPE_RGB: return "RGB";
    case PNG_COLOR_TYPE_RGB_ALPHA: return "RGBA";
    case PNG_COLOR_TYPE_PALETTE: return "palette";
    default: return "unknown";
  }
}

}  // namespace

ImageMeta read_sidecar(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MetadataError("malformed sidecar '" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) throw MetadataError("sidecar '" + path.string() + "' is not a JSON object");

  ImageMeta meta;
  auto string_field = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) {
      throw MetadataError("sidecar '" + path.string() + "': field '" + key + "' must be a string");
    }
    return j[key].get<std::string>();
  };
  if (auto p = string_field("photometric")) {
    if (*p == "MONOCHROME1") meta.photometric = Photometric::Monochrome1;
    else if (*p == "MONOCHROME2") meta.photometric = Photometric::Monochrome2;
    else throw MetadataError("sidecar '" + path.string() + "': unknown photometric '" + *p + "'");
  }
  if (auto l = string_field("laterality")) {
    if (*l == "L") meta.laterality = Laterality::Left;
    else if (*l == "R") meta.laterality = Laterality::Right;
    else throw MetadataError("sidecar '" + path.string() + "': unknown laterality '" + *l + "'");
  }
  if (auto id = string_field("source_id")) meta.source_id = *id;
  return meta;
}

Image read_image(const std::filesystem::path& path,
                 const std::optional<std::filesystem::path>& sidecar) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));

  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("'" + path.string() + "' is not a PNG file");
  }
  std::rewind(fp.get());

  PngRaw raw;
  char err[256] = {};
  if (!decode_png(fp.get(), &raw, err)) {
    throw FormatError("cannot decode '" + path.string() + "': " + err);
  }
  if (raw.color_type != PNG_COLOR_TYPE_GRAY) {
    throw FormatError("'" + path.string() + "' is " + color_type_name(raw.color_type) +
                      "; only single-channel grayscale is supported");
  }

  const std::size_t w = raw.width;
  const std::size_t h = raw.height;
  std::vector<double> data(w * h);
  if (raw.bit_depth == 16) {
    for (std::size_t r = 0; r < h; ++r) {
      const unsigned char* row = raw.bytes.data() + r * raw.row_bytes;
      for (std::size_t c = 0; c < w; ++c) {
        const unsigned v = (unsigned{row[2 * c]} << 8) | row[2 * c + 1];
        data[r * w + c] = v / 65535.0;
      }
    }
  } else {
    for (std::size_t r = 0; r < h; ++r) {
      const unsigned char* row = raw.bytes.data() + r * raw.row_bytes;
      for (std::size_t c = 0; c < w; ++c) data[r * w + c] = row[c] / 255.0;
    }
  }

  ImageMeta meta;
  if (sidecar) meta = read_sidecar(*sidecar);
  if (meta.source_id.empty()) meta.source_id = path.stem().string();
  return Image(w, h, std::move(data), std::move(meta));
}

void write_image(const Image& img, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw ConfigError("bit depth must be 8 or 16, got " + std::to_string(bit_depth));
  }
  if (img.empty()) throw DimensionError("cannot write an empty image");

  const double full_scale = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t bytes_per_px = bit_depth / 8;
  std::vector<unsigned char> bytes(img.size() * bytes_per_px);
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const auto code = static_cast<unsigned>(std::lround(std::clamp(px[i], 0.0, 1.0) * full_scale));
    if (bit_depth == 16) {
      bytes[2 * i] = static_cast<unsigned char>(code >> 8);
      bytes[2 * i + 1] = static_cast<unsigned char>(code & 0xff);
    } else {
      bytes[i] = static_cast<unsigned char>(code);
    }
  }

  const auto tmp = temp_sibling(path);
  {
    FilePtr fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) throw IoError("cannot open '" + tmp.string() + "' for writing: " + std::strerror(errno));
    char err[256] = {};
    if (!encode_png(fp.get(), &bytes, static_cast<png_uint_32>(img.width()),
                    static_cast<png_uint_32>(img.height()), bit_depth, err)) {
      throw IoError("cannot encode '" + path.string() + "': " + err);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
}

Image normalize_unit(const Image& img) {
  if (img.empty()) throw DegenerateInputError("normalize_unit: empty image");
  const auto px = img.pixels();
  const auto [lo, hi] = std::minmax_element(px.begin(), px.end());
  const double min = *lo;
  const double range = *hi - *lo;
  Image out(img.width(), img.height(), 0.0);
  out.meta() = img.meta();
  if (range > 0.0) {
    auto dst = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) dst[i] = (px[i] - min) / range;
  }
  return out;
}

}  // namespace imgeval
