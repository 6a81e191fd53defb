#pragma once

#include <compare>
#include <span>
#include <vector>

namespace boostaug {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  auto operator<=>(const Point2&) const = default;
};

/// z-component of (b - a) x (c - a); positive when a -> b -> c turns left.
inline double cross(const Point2& a, const Point2& b, const Point2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Counter-clockwise vertex list starting at the lowest-y (then lowest-x)
/// vertex, without collinear vertices. Fewer than three vertices means the
/// input was a single point or collinear; such polygons are flagged
/// degenerate and have zero area.
struct ConvexPolygon {
  std::vector<Point2> vertices;
  bool degenerate = true;

  bool operator==(const ConvexPolygon&) const = default;
};

/// Graham scan around the lowest-y, lowest-x pivot. Duplicate and collinear
/// boundary points are dropped. An empty input yields an empty degenerate polygon.
ConvexPolygon convex_hull(std::span<const Point2> points);

/// Shoelace formula, absolute value; 0 for degenerate polygons.
double polygon_area(const ConvexPolygon& polygon);
double polygon_area(std::span<const Point2> ring);

/// Closed containment test against a counter-clockwise convex polygon.
bool contains(const ConvexPolygon& polygon, const Point2& p);

/// Sutherland-Hodgman clip of `subject` by the half-planes of `clip`. Both
/// must be counter-clockwise and convex. The ring may repeat points.
std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip);

/// area(A and B) / area(A or B). Both degenerate: 1 if the vertex sets are
/// equal, else 0. Exactly one degenerate: 0.
double overlap_rate(const ConvexPolygon& a, const ConvexPolygon& b);

}  // namespace boostaug
