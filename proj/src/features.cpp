#include "imgeval/features.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "imgeval/error.hpp"
#include "imgeval/fileio.hpp"
#include "imgeval/npy.hpp"

namespace imgeval {

ActivationSet::ActivationSet(std::size_t n, std::size_t d, std::vector<double> rows,
                             std::string extractor_id)
    : n_(n), d_(d), data_(std::move(rows)), extractor_id_(std::move(extractor_id)) {
  if (data_.size() != n_ * d_) {
    throw DimensionError("activation data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(n_) + "x" + std::to_string(d_));
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw FormatError("activation set contains non-finite values");
  }
}

ActivationSet ActivationSet::select(std::span<const std::size_t> indices) const {
  std::vector<double> rows;
  rows.reserve(indices.size() * d_);
  for (std::size_t idx : indices) {
    if (idx >= n_) throw DimensionError("activation row index out of range");
    const auto r = row(idx);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return ActivationSet(indices.size(), d_, std::move(rows), extractor_id_);
}

ActivationSet load_activations(const std::filesystem::path& path) {
  npy::Array arr = npy::load(path);
  if (arr.shape.size() != 2) {
    throw FormatError(path.string() + ": expected a 2-D (n, d) array, got " +
                      std::to_string(arr.shape.size()) + " dimensions");
  }
  return ActivationSet(arr.shape[0], arr.shape[1], std::move(arr.data), path.stem().string());
}

void write_activations(const ActivationSet& acts, const std::filesystem::path& path) {
  npy::Array arr;
  arr.shape = {acts.n(), acts.d()};
  arr.data.assign(acts.data().begin(), acts.data().end());
  npy::save(path, arr);
}

ActivationSet toy_extract(std::span<const Image> images, std::uint64_t seed, std::size_t d) {
  constexpr std::size_t grid = 16;
  constexpr std::size_t in_dim = grid * grid;
  if (images.empty()) throw DegenerateInputError("toy_extract: no images");
  if (d == 0) throw ConfigError("toy_extract: feature dimension must be positive");
  const std::size_t w = images.front().width();
  const std::size_t h = images.front().height();
  if (w == 0 || h == 0) throw DegenerateInputError("toy_extract: empty image");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> projection(d * in_dim);
  for (double& v : projection) v = normal(rng) / static_cast<double>(grid);

  auto bounds = [](std::size_t i, std::size_t extent) {
    std::size_t lo = i * extent / grid;
    std::size_t hi = (i + 1) * extent / grid;
    lo = std::min(lo, extent - 1);
    hi = std::max(hi, lo + 1);
    return std::pair{lo, hi};
  };

  std::vector<double> rows(images.size() * d);
  std::vector<double> small(in_dim);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const Image& img = images[k];
    if (img.width() != w || img.height() != h) {
      throw DimensionError("toy_extract: images must share one size");
    }
    for (std::size_t gi = 0; gi < grid; ++gi) {
      const auto [r0, r1] = bounds(gi, h);
      for (std::size_t gj = 0; gj < grid; ++gj) {
        const auto [c0, c1] = bounds(gj, w);
        double acc = 0.0;
        for (std::size_t r = r0; r < r1; ++r) {
          for (std::size_t c = c0; c < c1; ++c) acc += img(r, c);
        }
        small[gi * grid + gj] = acc / static_cast<double>((r1 - r0) * (c1 - c0));
      }
    }
    for (std::size_t f = 0; f < d; ++f) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += projection[f * in_dim + i] * small[i];
      rows[k * d + f] = std::max(0.0, acc);
    }
  }
  return ActivationSet(images.size(), d, std::move(rows),
                       "toy-rp16x16-seed" + std::to_string(seed) + "-d" + std::to_string(d));
}

std::size_t MultiLayerActivations::index_of(const std::string& image) const {
  const auto it = std::find(images.begin(), images.end(), image);
  if (it == images.end()) throw DimensionError("no activations for image '" + image + "'");
  return static_cast<std::size_t>(it - images.begin());
}

void MultiLayerActivations::validate() const {
  if (layers.empty()) throw MetadataError("multi-layer activations have no layers");
  double total = 0.0;
  for (const auto& l : layers) {
    if (l.maps.size() != images.size() * l.image_stride()) {
      throw MetadataError("layer '" + l.name + "': map data does not match " +
                          std::to_string(images.size()) + " images of " +
                          std::to_string(l.channels) + "x" + std::to_string(l.height) + "x" +
                          std::to_string(l.width));
    }
    if (l.map_size() == 0) throw MetadataError("layer '" + l.name + "': empty spatial map");
    if (l.alpha.size() != l.channels || l.beta.size() != l.channels) {
      throw MetadataError("layer '" + l.name + "': weight tables must have one entry per channel");
    }
    for (std::size_t c = 0; c < l.channels; ++c) {
      if (l.alpha[c] < 0.0 || l.beta[c] < 0.0) {
        throw MetadataError("layer '" + l.name + "': negative weight");
      }
      total += l.alpha[c] + l.beta[c];
    }
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw MetadataError("DISTS weights sum to " + std::to_string(total) + ", expected 1");
  }
}

MultiLayerActivations load_multilayer(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw MetadataError("malformed manifest '" + manifest_path.string() + "': " + e.what());
  }
  MultiLayerActivations acts;
  try {
    acts.extractor_id = j.value("extractor_id", std::string{});
    acts.images = j.at("images").get<std::vector<std::string>>();
    for (const auto& jl : j.at("layers")) {
      LayerActivations l;
      l.name = jl.at("name").get<std::string>();
      l.channels = jl.at("channels").get<std::size_t>();
      l.height = jl.at("height").get<std::size_t>();
      l.width = jl.at("width").get<std::size_t>();
      l.alpha = jl.at("alpha").get<std::vector<double>>();
      l.beta = jl.at("beta").get<std::vector<double>>();
      npy::Array arr = npy::load(dir / jl.at("file").get<std::string>());
      const std::vector<std::size_t> expected{acts.images.size(), l.channels, l.height, l.width};
      if (arr.shape != expected) {
        throw MetadataError("layer '" + l.name + "': NPY shape does not match the manifest");
      }
      l.maps = std::move(arr.data);
      acts.layers.push_back(std::move(l));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MetadataError("manifest '" + manifest_path.string() + "': " + e.what());
  }
  acts.validate();
  return acts;
}

void write_multilayer(const MultiLayerActivations& acts, const std::filesystem::path& dir) {
  acts.validate();
  std::filesystem::create_directories(dir);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : acts.layers) {
    const std::string file = l.name + ".npy";
    npy::Array arr;
    arr.shape = {acts.images.size(), l.channels, l.height, l.width};
    arr.data = l.maps;
    npy::save(dir / file, arr);
    layers.push_back({{"name", l.name},
                      {"file", file},
                      {"channels", l.channels},
                      {"height", l.height},
                      {"width", l.width},
                      {"alpha", l.alpha},
                      {"beta", l.beta}});
  }
  nlohmann::json j = {{"extractor_id", acts.extractor_id}, {"images", acts.images}, {"layers", layers}};
  write_file_atomic(dir / "manifest.json", j.dump(2) + "\n");
}

double dists(const MultiLayerActivations& x, std::size_t i, const MultiLayerActivations& y,
             std::size_t j) {
  if (x.layers.size() != y.layers.size()) throw DimensionError("dists: layer count mismatch");
  if (i >= x.count() || j >= y.count()) throw DimensionError("dists: image index out of range");

  double similarity = 0.0;
  for (std::size_t l = 0; l < x.layers.size(); ++l) {
    const LayerActivations& lx = x.layers[l];
    const LayerActivations& ly = y.layers[l];
    if (lx.channels != ly.channels || lx.height != ly.height || lx.width != ly.width) {
      throw DimensionError("dists: shape mismatch in layer '" + lx.name + "'");
    }
    if (!ly.alpha.empty() && (ly.alpha != lx.alpha || ly.beta != lx.beta)) {
      throw MetadataError("dists: weight tables differ in layer '" + lx.name + "'");
    }
    const std::size_t hw = lx.map_size();
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t c = 0; c < lx.channels; ++c) {
      const double* mx = lx.maps.data() + i * lx.image_stride() + c * hw;
      const double* my = ly.maps.data() + j * ly.image_stride() + c * hw;
      double mean_x = 0.0, mean_y = 0.0;
      for (std::size_t k = 0; k < hw; ++k) {
        mean_x += mx[k];
        mean_y += my[k];
      }
      mean_x *= inv;
      mean_y *= inv;
      double var_x = 0.0, var_y = 0.0, cov = 0.0;
      for (std::size_t k = 0; k < hw; ++k) {
        const double dx = mx[k] - mean_x;
        const double dy = my[k] - mean_y;
        var_x += dx * dx;
        var_y += dy * dy;
        cov += dx * dy;
      }
      var_x *= inv;
      var_y *= inv;
      cov *= inv;
      const double texture = (2.0 * (mean_x * mean_y) + kDistsC1) / (mean_x * mean_x + mean_y * mean_y + kDistsC1);
      const double structure = (2.0 * cov + kDistsC2) / (var_x + var_y + kDistsC2);
      similarity += lx.alpha[c] * texture + lx.beta[c] * structure;
    }
  }
  return std::clamp(1.0 - similarity, 0.0, 1.0);
}

}  // namespace imgeval
