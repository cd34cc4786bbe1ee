#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace imgeval {

/// Reads a whole file into memory. Throws IoError.
std::string read_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temp file and renames it over `path`, so a
/// reader never observes a half-written file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Temp-file name used by the atomic writers; callers writing through other
/// APIs (libpng) rename it themselves.
std::filesystem::path temp_sibling(const std::filesystem::path& path);

}  // namespace imgeval
