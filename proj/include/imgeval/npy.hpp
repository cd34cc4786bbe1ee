#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace imgeval::npy {

enum class Dtype { Float32, Float64 };

/// N-d array as stored in a .npy file, values widened to double and always
/// held in C (row-major) order.
struct Array {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  /// Element type found on disk.
  Dtype stored = Dtype::Float64;

  std::size_t element_count() const;
};

/// Parses NPY format versions 1.0-3.0 holding little-endian '<f4'/'<f8'
/// data. Fortran-ordered payloads are reordered to row-major.
/// Throws FormatError (bad magic/header, unsupported dtype, truncated
/// payload) or IoError.
Array parse(const std::string& bytes, const std::string& origin = "<memory>");
Array load(const std::filesystem::path& path);

/// Serialises as NPY v1.0, C order, with the given element type.
std::string serialize(const Array& arr, Dtype dtype = Dtype::Float64);
void save(const std::filesystem::path& path, const Array& arr, Dtype dtype = Dtype::Float64);

}  // namespace imgeval::npy
