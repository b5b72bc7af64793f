#include "multishape/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "multishape/error.hpp"

namespace multishape {

std::vector<double> AlignmentGrid::scales() const {
  validate();
  std::vector<double> out;
  const int n = static_cast<int>(std::floor((scale_max - scale_min) / scale_step + 1e-9));
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out.push_back(scale_min + i * scale_step);
  return out;
}

double AlignmentGrid::rotation(int index) const {
  return 2.0 * std::numbers::pi * static_cast<double>(index) / static_cast<double>(rotation_steps);
}

void AlignmentGrid::validate() const {
  if (!(scale_min > 0.0) || !(scale_max >= scale_min) || !(scale_step > 0.0) ||
      rotation_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid alignment grid");
  }
}

namespace {

inline Point clipped_vertex(Point c, double scale, double radius, double cosv, double sinv,
                            Dims dims) {
  const double x = c.x + scale * radius * cosv;
  const double y = c.y + scale * radius * sinv;
  return {std::clamp(x, 0.0, static_cast<double>(dims.width)),
          std::clamp(y, 0.0, static_cast<double>(dims.height))};
}

}  // namespace

std::vector<Point> polygon_vertices(const ShapeVector& shape, Point centroid,
                                    const Alignment& alignment, Dims dims) {
  const int k = shape.size();
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double angle = ray_angle(i, k) + alignment.rotation;
    out.push_back(clipped_vertex(centroid, alignment.scale, shape[i], std::cos(angle),
                                 std::sin(angle), dims));
  }
  return out;
}

std::vector<RowSpan> merge_spans(std::vector<RowSpan> spans) {
  std::sort(spans.begin(), spans.end(), [](const RowSpan& a, const RowSpan& b) {
    return a.y != b.y ? a.y < b.y : a.x0 < b.x0;
  });
  std::vector<RowSpan> out;
  out.reserve(spans.size());
  for (const auto& s : spans) {
    if (!out.empty() && out.back().y == s.y && s.x0 <= out.back().x1 + 1) {
      out.back().x1 = std::max(out.back().x1, s.x1);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<RowSpan> scan_fill(std::span<const Point> polygon, Dims dims) {
  std::vector<RowSpan> spans;
  const std::size_t n = polygon.size();
  if (n < 3 || dims.width <= 0 || dims.height <= 0) return spans;

  // (row, x) crossings of each edge with the row's center line, half-open in y
  // so shared vertices are counted once.
  std::vector<std::pair<int, double>> crossings;
  crossings.reserve(2 * n);
  std::vector<RowSpan> horizontal;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    if (a.y == b.y) {
      const double yc = std::floor(a.y - 0.5) + 0.5;
      if (yc == a.y) {
        const int row = static_cast<int>(yc - 0.5);
        const int x0 = static_cast<int>(std::ceil(std::min(a.x, b.x) - 0.5));
        const int x1 = static_cast<int>(std::floor(std::max(a.x, b.x) - 0.5));
        if (row >= 0 && row < dims.height && x0 <= x1) horizontal.push_back({row, x0, x1});
      }
      continue;
    }
    const double ymin = std::min(a.y, b.y);
    const double ymax = std::max(a.y, b.y);
    const int first = std::max(0, static_cast<int>(std::ceil(ymin - 0.5)));
    const int last = std::min(dims.height, static_cast<int>(std::ceil(ymax - 0.5))) - 1;
    const double slope = (b.x - a.x) / (b.y - a.y);
    for (int row = first; row <= last; ++row) {
      const double yc = row + 0.5;
      crossings.emplace_back(row, a.x + (yc - a.y) * slope);
    }
  }
  std::sort(crossings.begin(), crossings.end());

  spans.reserve(crossings.size() / 2 + horizontal.size());
  for (std::size_t i = 0; i + 1 < crossings.size();) {
    const int row = crossings[i].first;
    if (crossings[i + 1].first != row) {
      ++i;
      continue;
    }
    const int x0 = std::max(0, static_cast<int>(std::ceil(crossings[i].second - 0.5)));
    const int x1 =
        std::min(dims.width - 1, static_cast<int>(std::floor(crossings[i + 1].second - 0.5)));
    if (x0 <= x1) spans.push_back({row, x0, x1});
    i += 2;
  }
  if (horizontal.empty()) {
    // Even-odd pairs within a row are already ordered and disjoint; only
    // touching neighbours need joining.
    return merge_spans(std::move(spans));
  }
  spans.insert(spans.end(), horizontal.begin(), horizontal.end());
  return merge_spans(std::move(spans));
}

void paint(std::span<const RowSpan> spans, BinaryMask& mask) {
  for (const auto& s : spans) {
    auto row = mask.row(s.y);
    std::fill(row.begin() + s.x0, row.begin() + s.x1 + 1, std::uint8_t{1});
  }
}

BinaryMask rasterize(const ShapeVector& shape, Point centroid, const Alignment& alignment,
                     Dims dims) {
  BinaryMask mask(dims);
  const auto vertices = polygon_vertices(shape, centroid, alignment, dims);
  paint(scan_fill(vertices, dims), mask);
  return mask;
}

MaskIndex::MaskIndex(const BinaryMask& mask) : dims_(mask.dims()) {
  prefix_.assign(static_cast<std::size_t>(dims_.height) * (dims_.width + 1), 0);
  for (int y = 0; y < dims_.height; ++y) {
    const auto row = mask.row(y);
    const auto base = static_cast<std::size_t>(y) * (dims_.width + 1);
    for (int x = 0; x < dims_.width; ++x) {
      prefix_[base + x + 1] = prefix_[base + x] + row[x];
    }
    total_ += static_cast<std::size_t>(prefix_[base + dims_.width]);
  }
}

Aligner::Aligner(const BinaryMask& clump, AlignmentGrid grid, int ray_count)
    : grid_(grid), ray_count_(ray_count), index_(clump), scales_(grid.scales()) {
  const auto table = static_cast<std::size_t>(grid_.rotation_steps) * ray_count_;
  cos_.resize(table);
  sin_.resize(table);
  for (int j = 0; j < grid_.rotation_steps; ++j) {
    for (int k = 0; k < ray_count_; ++k) {
      const double angle = ray_angle(k, ray_count_) + grid_.rotation(j);
      cos_[static_cast<std::size_t>(j) * ray_count_ + k] = std::cos(angle);
      sin_[static_cast<std::size_t>(j) * ray_count_ + k] = std::sin(angle);
    }
  }
}

Alignment Aligner::operator()(const ShapeVector& shape, Point centroid) const {
  if (shape.size() != ray_count_) {
    throw Error(ErrorCode::kDimensionMismatch, "shape ray count does not match aligner");
  }
  const Dims dims = index_.dims();
  std::vector<Point> vertices(static_cast<std::size_t>(ray_count_));

  // Returns pixels outside the clump (stopping early once above `budget`),
  // the filled area, and whether any vertex was clipped to the image.
  struct Outcome {
    long outside = 0;
    long area = 0;
    bool clipped = false;
  };
  auto evaluate = [&](double scale, int rot, long budget) {
    const double* c = &cos_[static_cast<std::size_t>(rot) * ray_count_];
    const double* s = &sin_[static_cast<std::size_t>(rot) * ray_count_];
    Outcome out;
    for (int k = 0; k < ray_count_; ++k) {
      const double x = centroid.x + scale * shape[k] * c[k];
      const double y = centroid.y + scale * shape[k] * s[k];
      out.clipped = out.clipped || x < 0.0 || y < 0.0 || x > dims.width || y > dims.height;
      vertices[static_cast<std::size_t>(k)] =
          clipped_vertex(centroid, scale, shape[k], c[k], s[k], dims);
    }
    for (const auto& span : scan_fill(vertices, dims)) {
      out.area += span.length();
      out.outside += span.length() - index_.covered(span);
      if (out.outside > budget) break;
    }
    return out;
  };

  // A radial polygon is star-shaped about its centroid, so at a fixed rotation
  // the unclipped polygon at scale r contains every smaller scale. The first
  // feasible scale met while descending therefore dominates the rest of that
  // column unless clipping distorted it.
  long best_area = -1;
  std::size_t best_scale = 0;
  int best_rot = 0;
  for (int rot = 0; rot < grid_.rotation_steps; ++rot) {
    for (std::size_t i = scales_.size(); i-- > 0;) {
      const auto out = evaluate(scales_[i], rot, 0);
      if (out.outside != 0) continue;
      const bool better = out.area > best_area ||
                          (out.area == best_area && i > best_scale);
      if (better) {
        best_area = out.area;
        best_scale = i;
        best_rot = rot;
      }
      if (!out.clipped) break;
    }
  }
  if (best_area >= 0) return {scales_[best_scale], grid_.rotation(best_rot)};

  Alignment best{};
  long fewest = std::numeric_limits<long>::max();
  for (double scale : scales_) {
    for (int rot = 0; rot < grid_.rotation_steps; ++rot) {
      const auto out = evaluate(scale, rot, fewest);
      if (out.outside < fewest) {
        fewest = out.outside;
        best = {scale, grid_.rotation(rot)};
      }
    }
  }
  return best;
}

Alignment align(const ShapeVector& shape, Point centroid, const BinaryMask& clump,
                const AlignmentGrid& grid) {
  return Aligner(clump, grid, shape.size())(shape, centroid);
}

}  // namespace multishape
