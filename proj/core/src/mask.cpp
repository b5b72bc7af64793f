#include "multishape/mask.hpp"

#include <algorithm>
#include <string>

#include "multishape/error.hpp"

namespace multishape {

BinaryMask::BinaryMask(Dims dims) : dims_(dims) {
  if (dims.width < 0 || dims.height < 0) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions must be non-negative");
  }
  bits_.assign(dims.area(), 0);
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

void require_same_dims(const BinaryMask& a, const BinaryMask& b) {
  if (a.dims() != b.dims()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "mask dimensions differ: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                    "x" + std::to_string(b.height()));
  }
}

}  // namespace

BinaryMask union_masks(std::span<const BinaryMask> masks) {
  if (masks.empty()) {
    throw Error(ErrorCode::kEmptyInput, "union of an empty mask list");
  }
  BinaryMask out = masks.front();
  for (const auto& m : masks.subspan(1)) {
    require_same_dims(out, m);
    auto dst = out.bits();
    auto src = m.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

std::size_t intersection_count(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b);
  auto x = a.bits();
  auto y = b.bits();
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += x[i] & y[i];
  return n;
}

std::size_t symmetric_difference_count(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a, b);
  auto x = a.bits();
  auto y = b.bits();
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) n += x[i] ^ y[i];
  return n;
}

}  // namespace multishape
