#include "imgeval/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <regex>

#include "imgeval/error.hpp"
#include "imgeval/fileio.hpp"

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace imgeval::npy {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string dict_value(const std::string& header, const std::string& key, const std::string& origin) {
  const std::regex re("['\"]" + key + "['\"]\\s*:\\s*");
  std::smatch m;
  if (!std::regex_search(header, m, re)) {
    throw FormatError(origin + ": NPY header lacks '" + key + "'");
  }
  return header.substr(static_cast<std::size_t>(m.position(0) + m.length(0)));
}

std::vector<std::size_t> parse_shape(const std::string& rest, const std::string& origin) {
  if (rest.empty() || rest[0] != '(') throw FormatError(origin + ": malformed NPY shape");
  const auto close = rest.find(')');
  if (close == std::string::npos) throw FormatError(origin + ": malformed NPY shape");
  std::vector<std::size_t> shape;
  const std::string body = rest.substr(1, close - 1);
  std::size_t pos = 0;
  while (pos < body.size()) {
    while (pos < body.size() && (body[pos] == ' ' || body[pos] == ',')) ++pos;
    if (pos >= body.size()) break;
    std::size_t used = 0;
    try {
      shape.push_back(std::stoull(body.substr(pos), &used));
    } catch (const std::exception&) {
      throw FormatError(origin + ": malformed NPY shape '" + body + "'");
    }
    pos += used;
  }
  return shape;
}

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

std::size_t Array::element_count() const { return product(shape); }

Array parse(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < kMagicLen + 4 || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw FormatError(origin + ": bad NPY magic string");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t header_len = 0;
  std::size_t offset = 0;
  if (major == 1) {
    header_len = static_cast<unsigned char>(bytes[8]) |
                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
    offset = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError(origin + ": truncated NPY header");
    for (int i = 0; i < 4; ++i) {
      header_len |= static_cast<std::size_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
    }
    offset = 12;
  } else {
    throw FormatError(origin + ": unsupported NPY version " + std::to_string(major));
  }
  if (bytes.size() < offset + header_len) throw FormatError(origin + ": truncated NPY header");
  const std::string header = bytes.substr(offset, header_len);
  offset += header_len;

  const std::string descr_rest = dict_value(header, "descr", origin);
  const auto q = descr_rest.empty() ? '\0' : descr_rest[0];
  const auto end = descr_rest.find(q, 1);
  if ((q != '\'' && q != '"') || end == std::string::npos) {
    throw FormatError(origin + ": malformed NPY descr");
  }
  const std::string descr = descr_rest.substr(1, end - 1);

  Array arr;
  std::size_t item = 0;
  if (descr == "<f8") {
    arr.stored = Dtype::Float64;
    item = 8;
  } else if (descr == "<f4") {
    arr.stored = Dtype::Float32;
    item = 4;
  } else {
    throw FormatError(origin + ": unsupported NPY dtype '" + descr +
                      "' (expected little-endian <f4 or <f8)");
  }

  const std::string fortran_rest = dict_value(header, "fortran_order", origin);
  bool fortran = false;
  if (fortran_rest.rfind("True", 0) == 0) fortran = true;
  else if (fortran_rest.rfind("False", 0) != 0) throw FormatError(origin + ": malformed fortran_order");

  arr.shape = parse_shape(dict_value(header, "shape", origin), origin);
  const std::size_t count = product(arr.shape);
  const std::size_t expected = count * item;
  const std::size_t actual = bytes.size() - offset;
  if (actual < expected) {
    throw FormatError(origin + ": truncated NPY payload, expected " + std::to_string(expected) +
                      " bytes but found " + std::to_string(actual));
  }

  std::vector<double> raw(count);
  const char* src = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    if (item == 8) {
      double v;
      std::memcpy(&v, src + i * 8, 8);
      raw[i] = v;
    } else {
      float v;
      std::memcpy(&v, src + i * 4, 4);
      raw[i] = v;
    }
  }

  if (fortran && arr.shape.size() > 1) {
    // Fortran order: first index varies fastest.
    const std::size_t nd = arr.shape.size();
    std::vector<std::size_t> c_stride(nd), f_stride(nd);
    c_stride[nd - 1] = 1;
    for (std::size_t d = nd - 1; d-- > 0;) c_stride[d] = c_stride[d + 1] * arr.shape[d + 1];
    f_stride[0] = 1;
    for (std::size_t d = 1; d < nd; ++d) f_stride[d] = f_stride[d - 1] * arr.shape[d - 1];
    arr.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t rem = i;
      std::size_t f_index = 0;
      for (std::size_t d = 0; d < nd; ++d) {
        const std::size_t idx = rem / c_stride[d];
        rem %= c_stride[d];
        f_index += idx * f_stride[d];
      }
      arr.data[i] = raw[f_index];
    }
  } else {
    arr.data = std::move(raw);
  }
  return arr;
}

Array load(const std::filesystem::path& path) { return parse(read_file(path), path.string()); }

std::string serialize(const Array& arr, Dtype dtype) {
  if (arr.data.size() != arr.element_count()) {
    throw DimensionError("npy: data length does not match shape");
  }
  std::string shape = "(";
  for (std::size_t i = 0; i < arr.shape.size(); ++i) {
    shape += std::to_string(arr.shape[i]);
    if (arr.shape.size() == 1 || i + 1 < arr.shape.size()) shape += ",";
    if (i + 1 < arr.shape.size()) shape += " ";
  }
  shape += ")";
  std::string header = std::string("{'descr': '") + (dtype == Dtype::Float64 ? "<f8" : "<f4") +
                       "', 'fortran_order': False, 'shape': " + shape + ", }";
  // Pad with spaces so magic + length + header + '\n' is a multiple of 64.
  const std::size_t unpadded = kMagicLen + 2 + 2 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';
  if (header.size() > 0xffff) throw FormatError("npy: header too long for v1.0");

  std::string out(kMagic, kMagicLen);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(header.size() & 0xff);
  out += static_cast<char>((header.size() >> 8) & 0xff);
  out += header;
  const std::size_t item = dtype == Dtype::Float64 ? 8 : 4;
  const std::size_t start = out.size();
  out.resize(start + arr.data.size() * item);
  for (std::size_t i = 0; i < arr.data.size(); ++i) {
    if (dtype == Dtype::Float64) {
      std::memcpy(out.data() + start + i * 8, &arr.data[i], 8);
    } else {
      const auto v = static_cast<float>(arr.data[i]);
      std::memcpy(out.data() + start + i * 4, &v, 4);
    }
  }
  return out;
}

void save(const std::filesystem::path& path, const Array& arr, Dtype dtype) {
  write_file_atomic(path, serialize(arr, dtype));
}

}  // namespace imgeval::npy
