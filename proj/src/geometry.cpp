#include "boostaug/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace boostaug {

namespace {

double dist2(const Point2& a, const Point2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  return dx * dx + dy * dy;
}

bool lower_pivot(const Point2& a, const Point2& b) { return a.y < b.y || (a.y == b.y && a.x < b.x); }

}  // namespace

ConvexPolygon convex_hull(std::span<const Point2> input) {
  std::vector<Point2> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  ConvexPolygon hull;
  if (pts.size() <= 1) {
    hull.vertices = pts;
    return hull;
  }

  const auto pivot_it = std::min_element(pts.begin(), pts.end(), lower_pivot);
  const Point2 pivot = *pivot_it;
  pts.erase(pivot_it);

  // Polar order around the pivot; equal angles nearest first. stable_sort
  // stays memory-safe should rounding make the comparator inconsistent.
  std::stable_sort(pts.begin(), pts.end(), [&](const Point2& a, const Point2& b) {
    const double c = cross(pivot, a, b);
    if (c != 0.0) return c > 0.0;
    return dist2(pivot, a) < dist2(pivot, b);
  });

  std::vector<Point2> stack{pivot};
  for (const auto& p : pts) {
    while (stack.size() >= 2 && cross(stack[stack.size() - 2], stack.back(), p) <= 0.0) stack.pop_back();
    stack.push_back(p);
  }
  // The last ray may leave a collinear tail before closing back at the pivot.
  while (stack.size() >= 3 && cross(stack[stack.size() - 2], stack.back(), pivot) <= 0.0) stack.pop_back();

  hull.vertices = std::move(stack);
  hull.degenerate = hull.vertices.size() < 3;
  return hull;
}

double polygon_area(std::span<const Point2> ring) {
  if (ring.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::abs(twice) * 0.5;
}

double polygon_area(const ConvexPolygon& polygon) {
  return polygon.degenerate ? 0.0 : polygon_area(std::span<const Point2>(polygon.vertices));
}

bool contains(const ConvexPolygon& polygon, const Point2& p) {
  const auto& v = polygon.vertices;
  if (v.empty()) return false;
  if (v.size() == 1) return v[0] == p;
  if (v.size() == 2) {
    return cross(v[0], v[1], p) == 0.0 && std::min(v[0].x, v[1].x) <= p.x && p.x <= std::max(v[0].x, v[1].x) &&
           std::min(v[0].y, v[1].y) <= p.y && p.y <= std::max(v[0].y, v[1].y);
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    if (cross(v[i], v[(i + 1) % v.size()], p) < 0.0) return false;
  return true;
}

std::vector<Point2> clip_convex(std::span<const Point2> subject, std::span<const Point2> clip) {
  std::vector<Point2> output(subject.begin(), subject.end());
  for (std::size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Point2 a = clip[e];
    const Point2 b = clip[(e + 1) % clip.size()];
    std::vector<Point2> input;
    input.swap(output);
    for (std::size_t i = 0; i < input.size(); ++i) {
      const Point2& cur = input[i];
      const Point2& prev = input[(i + input.size() - 1) % input.size()];
      const double dc = cross(a, b, cur);
      const double dp = cross(a, b, prev);
      if (dc >= 0.0) {
        if (dp < 0.0) {
          const double t = dp / (dp - dc);
          output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
        }
        output.push_back(cur);
      } else if (dp >= 0.0) {
        const double t = dp / (dp - dc);
        output.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
    }
  }
  return output;
}

double overlap_rate(const ConvexPolygon& a, const ConvexPolygon& b) {
  if (a.degenerate || b.degenerate) {
    if (a.degenerate && b.degenerate) return a.vertices == b.vertices ? 1.0 : 0.0;
    return 0.0;
  }
  if (a.vertices == b.vertices) return 1.0;
  // Clip in a fixed order so the result is symmetric to the last bit.
  const auto& first = a.vertices < b.vertices ? a : b;
  const auto& second = a.vertices < b.vertices ? b : a;
  const double area_a = polygon_area(a);
  const double area_b = polygon_area(b);
  const auto ring = clip_convex(first.vertices, second.vertices);
  const double inter = std::clamp(polygon_area(std::span<const Point2>(ring)), 0.0, std::min(area_a, area_b));
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace boostaug
