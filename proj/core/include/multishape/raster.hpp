#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "multishape/mask.hpp"
#include "multishape/shape_model.hpp"

namespace multishape {

/// Similarity applied to a shape vector about its centroid.
struct Alignment {
  double scale = 1.0;     // multiplier on radii
  double rotation = 0.0;  // radians in [0, 2*pi)

  friend bool operator==(const Alignment&, const Alignment&) = default;
};

/// Exhaustive search lattice for align().
struct AlignmentGrid {
  double scale_min = 0.3;
  double scale_max = 2.0;
  double scale_step = 0.05;
  int rotation_steps = 72;

  std::vector<double> scales() const;
  double rotation(int index) const;
  void validate() const;
};

/// Horizontal run of filled pixels, columns x0..x1 inclusive.
struct RowSpan {
  int y = 0;
  int x0 = 0;
  int x1 = 0;

  int length() const { return x1 - x0 + 1; }
  friend bool operator==(const RowSpan&, const RowSpan&) = default;
};

/// Boundary points centroid + scale * radii[k] * (cos, sin)(2*pi*k/K + rotation),
/// clipped to the image rectangle [0, width] x [0, height].
std::vector<Point> polygon_vertices(const ShapeVector& shape, Point centroid,
                                    const Alignment& alignment, Dims dims);

/// Even-odd scanline fill sampled at pixel centers. A center lying exactly on
/// an edge counts as inside. Output spans are sorted by (y, x0) and disjoint.
std::vector<RowSpan> scan_fill(std::span<const Point> polygon, Dims dims);

/// Sorts and merges overlapping or touching spans.
std::vector<RowSpan> merge_spans(std::vector<RowSpan> spans);

void paint(std::span<const RowSpan> spans, BinaryMask& mask);

BinaryMask rasterize(const ShapeVector& shape, Point centroid, const Alignment& alignment,
                     Dims dims);

/// Row prefix counts of a mask, for O(1) foreground counts over a span.
class MaskIndex {
 public:
  explicit MaskIndex(const BinaryMask& mask);

  Dims dims() const { return dims_; }
  std::size_t foreground() const { return total_; }
  /// Foreground pixels of the indexed mask covered by `span`.
  int covered(const RowSpan& span) const {
    const auto base = static_cast<std::size_t>(span.y) * (dims_.width + 1);
    return prefix_[base + span.x1 + 1] - prefix_[base + span.x0];
  }

 private:
  Dims dims_;
  std::vector<int> prefix_;
  std::size_t total_ = 0;
};

/// Grid search for the alignment maximizing |B_i| subject to B_i inside the
/// clump. Ties prefer larger scale, then smaller rotation. When no candidate
/// fits, returns the one with the fewest pixels outside the clump, ties
/// preferring smaller scale, then smaller rotation.
class Aligner {
 public:
  Aligner(const BinaryMask& clump, AlignmentGrid grid, int ray_count);

  Alignment operator()(const ShapeVector& shape, Point centroid) const;

  const AlignmentGrid& grid() const { return grid_; }
  const MaskIndex& clump_index() const { return index_; }

 private:
  AlignmentGrid grid_;
  int ray_count_;
  MaskIndex index_;
  std::vector<double> scales_;
  std::vector<double> cos_;  // rotation_steps x ray_count
  std::vector<double> sin_;
};

Alignment align(const ShapeVector& shape, Point centroid, const BinaryMask& clump,
                const AlignmentGrid& grid = {});

}  // namespace multishape
