#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace multishape {

/// Real-valued pixel coordinate. Pixel (px, py) covers [px, px+1) x [py, py+1),
/// so its center sits at (px + 0.5, py + 0.5).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Dims {
  int width = 0;
  int height = 0;

  std::size_t area() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

/// Row-major binary image; every stored byte is 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(Dims dims);
  BinaryMask(int width, int height) : BinaryMask(Dims{width, height}) {}

  Dims dims() const { return dims_; }
  int width() const { return dims_.width; }
  int height() const { return dims_.height; }
  bool empty() const { return bits_.empty(); }

  bool at(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * dims_.width + x] != 0;
  }
  /// Out-of-range coordinates read as background.
  bool test(int x, int y) const { return dims_.contains(x, y) && at(x, y); }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * dims_.width + x] = value ? 1 : 0;
  }

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::span<std::uint8_t> bits() { return bits_; }
  std::span<const std::uint8_t> row(int y) const {
    return std::span<const std::uint8_t>(bits_).subspan(
        static_cast<std::size_t>(y) * dims_.width, dims_.width);
  }
  std::span<std::uint8_t> row(int y) {
    return std::span<std::uint8_t>(bits_).subspan(
        static_cast<std::size_t>(y) * dims_.width, dims_.width);
  }

  /// Number of foreground pixels.
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Dims dims_{};
  std::vector<std::uint8_t> bits_;
};

/// Pixelwise OR. Throws kEmptyInput for an empty list and kDimensionMismatch
/// when the masks disagree on dimensions.
BinaryMask union_masks(std::span<const BinaryMask> masks);

/// |a AND b|; masks must share dimensions.
std::size_t intersection_count(const BinaryMask& a, const BinaryMask& b);

/// |a XOR b|; masks must share dimensions.
std::size_t symmetric_difference_count(const BinaryMask& a, const BinaryMask& b);

}  // namespace multishape
