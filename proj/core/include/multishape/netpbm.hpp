#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "multishape/mask.hpp"

namespace multishape {

/// Binary PGM (P5, maxval 255): foreground 255, background 0.
std::string encode_pgm(const BinaryMask& mask);

/// Accepts P5 and P2. Any nonzero sample is foreground.
BinaryMask decode_pgm(std::string_view bytes);

BinaryMask read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);

struct RgbImage {
  Dims dims{};
  std::vector<std::array<std::uint8_t, 3>> pixels;

  explicit RgbImage(Dims d) : dims(d), pixels(d.area(), {0, 0, 0}) {}
  std::array<std::uint8_t, 3>& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * dims.width + x];
  }
};

/// Binary PPM (P6, maxval 255).
std::string encode_ppm(const RgbImage& image);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

/// Whole-file read; throws kIoError naming the path.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace multishape
