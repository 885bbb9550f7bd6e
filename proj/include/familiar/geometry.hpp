#pragma once

#include <algorithm>
#include <cmath>

namespace familiar {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Axis-aligned rectangle anchored at its lower-left corner.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double top() const { return y + h; }
  Point center() const { return {x + w / 2, y + h / 2}; }

  bool contains(Point p) const { return p.x >= x && p.x <= right() && p.y >= y && p.y <= top(); }
  bool contains(const Rect& r) const {
    return r.x >= x && r.right() <= right() && r.y >= y && r.top() <= top();
  }

  /// Euclidean distance from `p` to the rectangle; zero inside.
  double distance_to(Point p) const {
    const double dx = std::max({x - p.x, 0.0, p.x - right()});
    const double dy = std::max({y - p.y, 0.0, p.y - top()});
    return std::hypot(dx, dy);
  }

  Rect inflated(double margin) const { return {x - margin, y - margin, w + 2 * margin, h + 2 * margin}; }

  bool operator==(const Rect&) const = default;
};

/// Segment vs. rectangle test (slab clipping); touching counts as intersecting.
inline bool segment_intersects(Point a, Point b, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double lo[2] = {r.x - a.x, r.y - a.y};
  const double hi[2] = {r.right() - a.x, r.top() - a.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (lo[axis] > 0.0 || hi[axis] < 0.0) return false;
      continue;
    }
    double ta = lo[axis] / d[axis];
    double tb = hi[axis] / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace familiar
