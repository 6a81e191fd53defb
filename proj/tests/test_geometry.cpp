#include <doctest.h>

#include <cmath>
#include <set>

#include "boostaug/geometry.hpp"
#include "boostaug/rng.hpp"
#include "oracles.hpp"

using namespace boostaug;

namespace {

ConvexPolygon hull(std::vector<Point2> pts) { return convex_hull(pts); }

ConvexPolygon box(double x0, double y0, double x1, double y1) { return hull({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}); }

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("square with an interior point") {
  const auto h = hull({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
  CHECK(!h.degenerate);
  CHECK(h.vertices == std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(polygon_area(h) == 1.0);
}

TEST_CASE("collinear boundary points and duplicates are dropped") {
  const auto h = hull({{0, 0}, {2, 0}, {1, 0}, {2, 2}, {0, 2}, {0, 1}, {2, 2}, {0, 0}});
  CHECK(h.vertices == std::vector<Point2>{{0, 0}, {2, 0}, {2, 2}, {0, 2}});
}

TEST_CASE("degenerate inputs") {
  CHECK(hull({}).degenerate);
  CHECK(hull({}).vertices.empty());
  const auto one = hull({{1, 1}, {1, 1}});
  CHECK(one.degenerate);
  CHECK(one.vertices.size() == 1);
  const auto line = hull({{0, 0}, {1, 1}, {3, 3}, {2, 2}});
  CHECK(line.degenerate);
  CHECK(polygon_area(line) == 0.0);
}

TEST_CASE("hull starts at the lowest then leftmost vertex and turns left") {
  const auto h = hull({{3, 1}, {0, 1}, {1, 3}, {2, 0}, {5, 0}, {4, 4}});
  CHECK(h.vertices.front() == Point2{2, 0});
  for (std::size_t i = 0; i < h.vertices.size(); ++i) {
    const auto& a = h.vertices[i];
    const auto& b = h.vertices[(i + 1) % h.vertices.size()];
    const auto& c = h.vertices[(i + 2) % h.vertices.size()];
    CHECK(cross(a, b, c) > 0);
  }
}

TEST_CASE("property: hull vertices match brute-force extreme points") {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<Point2> pts;
    // Small integer grid: exact arithmetic with frequent collinearity.
    for (std::size_t i = 0; i < n; ++i) pts.push_back({static_cast<double>(rng.below(6)), static_cast<double>(rng.below(6))});
    const auto h = convex_hull(pts);
    const std::set<Point2> got(h.vertices.begin(), h.vertices.end());
    REQUIRE(got.size() == h.vertices.size());
    REQUIRE(got == oracle::hull_vertices(pts));
  }
}

TEST_CASE("overlap of shifted unit squares is one third") {
  CHECK(std::abs(overlap_rate(box(0, 0, 1, 1), box(0.5, 0, 1.5, 1)) - 1.0 / 3.0) < 1e-9);
}

TEST_CASE("overlap edge cases") {
  const auto a = box(0, 0, 1, 1);
  CHECK(overlap_rate(a, a) == 1.0);
  CHECK(overlap_rate(a, box(2, 2, 3, 3)) == 0.0);
  CHECK(overlap_rate(a, box(1, 0, 2, 1)) == 0.0);
  CHECK(overlap_rate(a, box(0.25, 0.25, 0.75, 0.75)) == doctest::Approx(0.25));
  const auto seg = hull({{0, 0}, {1, 1}});
  CHECK(overlap_rate(seg, seg) == 1.0);
  CHECK(overlap_rate(seg, hull({{0, 0}, {2, 2}})) == 0.0);
  CHECK(overlap_rate(seg, a) == 0.0);
}

TEST_CASE("property: overlap is symmetric, bounded and invariant under rigid motion") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> pa, pb;
    for (int i = 0; i < 8; ++i) pa.push_back({rng.uniform(), rng.uniform()});
    for (int i = 0; i < 8; ++i) pb.push_back({rng.uniform() + 0.3, rng.uniform()});
    const double r = overlap_rate(convex_hull(pa), convex_hull(pb));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(r - overlap_rate(convex_hull(pb), convex_hull(pa))) < 1e-12);
    const double th = rng.uniform() * 6.283, dx = rng.uniform() * 10, dy = -rng.uniform() * 10;
    auto move = [&](std::vector<Point2> pts) {
      for (auto& p : pts) p = {std::cos(th) * p.x - std::sin(th) * p.y + dx, std::sin(th) * p.x + std::cos(th) * p.y + dy};
      return pts;
    };
    CHECK(std::abs(r - overlap_rate(convex_hull(move(pa)), convex_hull(move(pb)))) < 1e-9);
  }
}

TEST_CASE("containment is closed") {
  const auto a = box(0, 0, 1, 1);
  CHECK(contains(a, {0.5, 0.5}));
  CHECK(contains(a, {1, 0.5}));
  CHECK(contains(a, {0, 0}));
  CHECK(!contains(a, {1.0001, 0.5}));
}

TEST_CASE("hull area agrees with a Monte-Carlo estimate") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<Point2> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({rng.uniform(), rng.uniform()});
    const auto h = convex_hull(pts);
    const auto ring = oracle::ordered_ring(oracle::hull_vertices(pts));
    const int samples = 100000;
    int inside = 0;
    for (int s = 0; s < samples; ++s) inside += oracle::ring_contains(ring, {rng.uniform(), rng.uniform()});
    const double mc = static_cast<double>(inside) / samples;
    CHECK(std::abs(polygon_area(h) - mc) / mc < 0.01);
  }
}

}  // TEST_SUITE
