#pragma once

#include <algorithm>
#include <cmath>
#include <compare>

namespace rssfp {

/// Planar floor coordinates in meters, origin at the bottom-left corner.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point&, const Point&) = default;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

inline bool is_finite(const Point& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool valid() const {
    return std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) &&
           std::isfinite(y1) && x1 > x0 && y1 > y0;
  }

  bool contains_closed(const Point& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }

  // Half-open membership: a point on a shared edge belongs to the lower/left
  // rectangle. Edges lying on the floor's upper/right boundary stay closed so
  // the whole floor is covered.
  bool contains_partition(const Point& p, const Rect& floor) const {
    const bool in_x = p.x >= x0 && (p.x < x1 || (p.x == x1 && x1 >= floor.x1));
    const bool in_y = p.y >= y0 && (p.y < y1 || (p.y == y1 && y1 >= floor.y1));
    return in_x && in_y;
  }

  bool intersects(const Rect& o) const {
    return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
  }

  /// True when the two rectangles touch along an edge of positive length.
  bool shares_boundary(const Rect& o, double eps = 1e-9) const {
    const double x_overlap = std::min(x1, o.x1) - std::max(x0, o.x0);
    const double y_overlap = std::min(y1, o.y1) - std::max(y0, o.y0);
    const bool vertical_touch =
        (std::abs(x1 - o.x0) < eps || std::abs(o.x1 - x0) < eps) && y_overlap > eps;
    const bool horizontal_touch =
        (std::abs(y1 - o.y0) < eps || std::abs(o.y1 - y0) < eps) && x_overlap > eps;
    return vertical_touch || horizontal_touch;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Segment {
  Point a;
  Point b;
};

/// Proper crossing of two segments. Touching endpoints, grazing contact and
/// collinear overlap do not count.
inline bool segments_cross(const Segment& s, const Segment& t) {
  auto orient = [](const Point& p, const Point& q, const Point& r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  };
  const double d1 = orient(t.a, t.b, s.a);
  const double d2 = orient(t.a, t.b, s.b);
  const double d3 = orient(s.a, s.b, t.a);
  const double d4 = orient(s.a, s.b, t.b);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
         ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace rssfp
