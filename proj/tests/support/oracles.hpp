// Test-only reference implementations. They deliberately use plain per-pixel
// loops so they stay independent of the span-based production code.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "multishape/mask.hpp"

namespace multishape::testing {

inline BinaryMask disk_mask(Dims dims, Point center, double radius) {
  BinaryMask m(dims);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) {
      if (std::hypot(x + 0.5 - center.x, y + 0.5 - center.y) <= radius) m.set(x, y);
    }
  }
  return m;
}

inline BinaryMask rect_mask(Dims dims, int x0, int y0, int x1, int y1) {
  BinaryMask m(dims);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) m.set(x, y);
  }
  return m;
}

inline BinaryMask random_mask(Dims dims, std::mt19937& rng, double density) {
  std::bernoulli_distribution coin(density);
  BinaryMask m(dims);
  for (int y = 0; y < dims.height; ++y) {
    for (int x = 0; x < dims.width; ++x) m.set(x, y, coin(rng));
  }
  return m;
}

inline long naive_count(const BinaryMask& m) {
  long n = 0;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) n += m.at(x, y) ? 1 : 0;
  }
  return n;
}

/// sum over pixels of (union(masks) - clump)^2.
inline long naive_energy(const std::vector<BinaryMask>& masks, const BinaryMask& clump) {
  long e = 0;
  for (int y = 0; y < clump.height(); ++y) {
    for (int x = 0; x < clump.width(); ++x) {
      int u = 0;
      for (const auto& m : masks) u = std::max(u, m.at(x, y) ? 1 : 0);
      const int d = u - (clump.at(x, y) ? 1 : 0);
      e += d * d;
    }
  }
  return e;
}

/// Distance from `c` along direction `angle` to the boundary of the pixel
/// rectangle covering columns x0..x1 and rows y0..y1 (slab method).
inline double ray_rect_exit(Point c, double angle, int x0, int y0, int x1, int y1) {
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  double t = std::numeric_limits<double>::infinity();
  if (std::abs(dx) > 1e-12) t = std::min(t, ((dx > 0 ? x1 + 1.0 : x0) - c.x) / dx);
  if (std::abs(dy) > 1e-12) t = std::min(t, ((dy > 0 ? y1 + 1.0 : y0) - c.y) / dy);
  return t;
}

/// Point-in-polygon by crossing parity, sampled at the pixel center.
inline bool inside_polygon(const std::vector<Point>& poly, double px, double py) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point& a = poly[i];
    const Point& b = poly[j];
    if ((a.y > py) != (b.y > py)) {
      const double x = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
      if (px < x) in = !in;
    }
  }
  return in;
}

struct NaiveMetrics {
  double tpr, tnr, fpr, fnr;
};

// Per-pixel double loop over the image and the objects.
inline NaiveMetrics naive_metrics(const std::vector<BinaryMask>& pred,
                           const std::vector<BinaryMask>& truth) {
  const int w = truth[0].width(), h = truth[0].height();
  std::size_t truth_fg = 0, hit = 0, truth_bg = 0, rejected = 0, missed = 0, total = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool t = false, p = false;
      for (std::size_t i = 0; i < truth.size(); ++i) {
        t = t || truth[i].at(x, y);
        p = p || pred[i].at(x, y);
        if (truth[i].at(x, y)) {
          ++total;
          if (!pred[i].at(x, y)) ++missed;
        }
      }
      if (t) {
        ++truth_fg;
        if (p) ++hit;
      } else {
        ++truth_bg;
        if (!p) ++rejected;
      }
    }
  }
  auto r = [](std::size_t a, std::size_t b) { return b == 0 ? 0.0 : double(a) / double(b); };
  const double tnr = r(rejected, truth_bg);
  return {r(hit, truth_fg), tnr, 1.0 - tnr, r(missed, total)};
}

inline double naive_dsc(const BinaryMask& a, const BinaryMask& b) {
  long ia = 0, ib = 0, both = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      ia += a.at(x, y);
      ib += b.at(x, y);
      both += a.at(x, y) && b.at(x, y);
    }
  }
  return ia + ib == 0 ? 1.0 : 2.0 * double(both) / double(ia + ib);
}

}  // namespace multishape::testing
