#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "gridconv/forms.hpp"
#include "gridconv/grid.hpp"

using namespace gridconv;

namespace {

GridDomain grid3x3() {
  std::vector<Vec2i> pts;
  for (Int a = -1; a <= 1; ++a)
    for (Int b = -1; b <= 1; ++b) pts.push_back({a, b});
  return GridDomain::from_points(pts);
}

std::set<Vec2i, Vec2iLess> as_set(const std::vector<Vec2i>& v) { return {v.begin(), v.end()}; }

GridDomain disc_grid(double radius, double theta, Vec2d xi) {
  // Regular 64-gon approximating the disc of the given radius.
  std::vector<Vec2d> verts;
  for (int k = 0; k < 64; ++k) {
    double t = 2 * M_PI * k / 64;
    verts.push_back({radius * std::cos(t), radius * std::sin(t)});
  }
  return GridDomain::build(ConvexPolygon(std::move(verts)), 1.0, theta, xi);
}

}  // namespace

TEST_CASE("build_grid examples") {
  auto unit = GridDomain::build(ConvexPolygon::rectangle(0, 0, 1, 1), 1.0, 0.0, {0, 0});
  CHECK(unit.size() == 4);

  auto paper = GridDomain::build(ConvexPolygon::rectangle(1, 1, 2, 2), 1.0 / 49, 0.0, {49, 49});
  CHECK(paper.size() == 2500);
  CHECK(paper.point(0) == Vec2i{0, 0});
  Vec2d p0 = paper.embed(PointIndex{0});
  CHECK(p0.x == Catch::Approx(1.0).margin(1e-12));
  CHECK(p0.y == Catch::Approx(1.0).margin(1e-12));

  // Same count as an exhaustive membership scan of the covering lattice box.
  const double h = 0.6, theta = M_PI / 4;
  auto rotated = GridDomain::build(ConvexPolygon::rectangle(0, 0, 1, 1), h, theta, {0, 0});
  int expected = 0;
  for (Int a = -3; a <= 3; ++a)
    for (Int b = -3; b <= 3; ++b) {
      Vec2d p = rotate({static_cast<double>(a), static_cast<double>(b)}, theta) * h;
      if (p.x >= -1e-12 * h && p.x <= 1 + 1e-12 * h && p.y >= -1e-12 * h && p.y <= 1 + 1e-12 * h)
        ++expected;
    }
  CHECK(rotated.size() == expected);

  CHECK_THROWS_AS(GridDomain::build(ConvexPolygon::rectangle(0, 0, 0.4, 0.4), 1.0, 0.0, {0.7, 0.7}),
                  std::runtime_error);
  CHECK_THROWS_AS(GridDomain::build(ConvexPolygon::rectangle(0, 0, 1, 1), -1.0, 0.0, {0, 0}),
                  std::invalid_argument);
}

TEST_CASE("grid point order is lexicographic") {
  auto g = GridDomain::square(0, 3, 4);
  for (PointIndex i = 1; i < g.size(); ++i)
    CHECK(Vec2iLess{}(g.point(static_cast<PointIndex>(i - 1)), g.point(i)));
}

TEST_CASE("max_stencil examples") {
  auto g = grid3x3();
  auto center = as_set(g.max_stencil(g.index_of({0, 0})));
  CHECK(center == std::set<Vec2i, Vec2iLess>{{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}});

  auto corner = as_set(g.max_stencil(g.index_of({-1, -1})));
  CHECK(corner == std::set<Vec2i, Vec2iLess>{{1, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 1}});

  auto two = GridDomain::from_points({{0, 0}, {1, 0}});
  CHECK(as_set(two.max_stencil(two.index_of({0, 0}))) == std::set<Vec2i, Vec2iLess>{{1, 0}});
}

TEST_CASE("is_supported") {
  auto g = grid3x3();
  CHECK(is_supported(g, form_S({0, 0}, {1, 0})));
  CHECK_FALSE(is_supported(g, form_S({-1, -1}, {1, 0})));
  CHECK(is_supported(g, form_T({0, 0}, {1, 1})));  // sites (1,1), (-1,0), (0,-1)
}

TEST_CASE("max stencil symmetry") {
  auto g = disc_grid(3.7, 0.3, {0.2, 0.6});
  for (PointIndex i = 0; i < g.size(); ++i) {
    Vec2i x = g.point(i);
    for (Vec2i e : g.max_stencil(i)) {
      PointIndex j = g.find(x + e);
      REQUIRE(j >= 0);
      CHECK(g.contains(g.point(j) - e));
    }
  }
}

TEST_CASE("rotating the grid by a quarter turn preserves cardinality on a disc") {
  for (double theta : {0.13, 0.51, 1.02}) {
    for (Vec2d xi : {Vec2d{0.0, 0.0}, Vec2d{0.37, 0.81}}) {
      auto a = disc_grid(5.3, theta, xi);
      Vec2d xi_rot = rotate(xi, M_PI / 2);
      xi_rot = {xi_rot.x - std::floor(xi_rot.x), xi_rot.y - std::floor(xi_rot.y)};
      auto b = disc_grid(5.3, theta + M_PI / 2, xi_rot);
      CHECK(a.size() == b.size());
    }
  }
}

TEST_CASE("maximal stencil cardinality grows quadratically") {
  for (int n : {6, 10, 14}) {
    auto g = GridDomain::square(0, n - 1, n);
    long long total = 0;
    for (PointIndex i = 0; i < g.size(); ++i)
      g.for_each_max_stencil(i, [&](Vec2i) { ++total; });
    const double N = static_cast<double>(g.size());
    CHECK(static_cast<double>(total) <= 2.0 * N * N);
    CHECK(static_cast<double>(total) >= 0.2 * N * N);
  }
}
