#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gridconv/delaunay.hpp"
#include "gridconv/hull_oracle.hpp"
#include "gridconv/rng.hpp"

using namespace gridconv;

namespace {

GridDomain lattice_square(Int r) {
  std::vector<Vec2i> pts;
  for (Int a = -r; a <= r; ++a)
    for (Int b = -r; b <= r; ++b) pts.push_back({a, b});
  return GridDomain::from_points(pts);
}

std::vector<double> perturbed_q(const GridDomain& g, const CounterRng& rng, std::uint64_t stream) {
  auto u = q_values(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += 0.1 * rng.uniform(stream * 4096 + i);
  return u;
}

std::set<std::array<PointIndex, 3>> triangle_set(const std::vector<std::array<PointIndex, 3>>& tris) {
  std::set<std::array<PointIndex, 3>> out;
  for (auto t : tris) {
    std::sort(t.begin(), t.end());
    out.insert(t);
  }
  return out;
}

}  // namespace

TEST_CASE("standard Delaunay triangle and edge counts") {
  auto g2 = GridDomain::square(0, 1, 2);
  auto T2 = standard_delaunay(g2);
  CHECK(T2.size() == 2);

  for (int n : {3, 5, 8}) {
    auto g = GridDomain::square(0, n - 1, n);
    auto T = standard_delaunay(g);
    validate_triangulation(T);
    CHECK(T.size() == static_cast<std::size_t>(2 * (n - 1) * (n - 1)));
    CHECK(T.edge_count() <= 3 * (static_cast<long long>(g.size()) - 2));
    CHECK(is_u_delaunay(T, q_values(g), 0.0));
  }

  std::vector<Vec2i> row;
  for (Int k = 0; k < 6; ++k) row.push_back({k, 0});
  auto degenerate = GridDomain::from_points(row);
  CHECK_THROWS(standard_delaunay(degenerate));
}

TEST_CASE("u-Delaunay detection and a single flip") {
  auto g = GridDomain::square(0, 1, 2);
  auto T = standard_delaunay(g);

  // Heights that disagree with whichever diagonal T carries.
  std::vector<double> u(4, 0.0);
  auto q = edge_quad(T, 0, 0);
  for (int i = 0; i < 3 && !q; ++i) q = edge_quad(T, 0, i);
  REQUIRE(q.has_value());
  u[static_cast<std::size_t>(q->a)] = 1.0;
  u[static_cast<std::size_t>(q->b)] = 1.0;
  CHECK_FALSE(is_u_delaunay(T, u, 1e-12));

  auto flipped = flip_to_u_delaunay(T, u);
  CHECK(flipped.flip_count == 1);
  CHECK(is_u_delaunay(flipped.triangulation, u, 1e-12));

  CHECK(flip_to_u_delaunay(standard_delaunay(g), std::vector<double>(4, 0.0)).flip_count == 0);
}

TEST_CASE("flips reproduce the lower hull for generic convex data") {
  CounterRng rng(3);
  for (Int r : {1, 2}) {
    auto g = lattice_square(r);
    for (std::uint64_t t = 0; t < 4; ++t) {
      auto u = perturbed_q(g, rng, t + 10 * static_cast<std::uint64_t>(r));
      REQUIRE(convexity_defect(g, u) == 0.0);
      auto run = flip_to_u_delaunay(standard_delaunay(g), u);
      CHECK(is_u_delaunay(run.triangulation, u, 1e-12));
      auto hull = lower_hull(g, u);
      CHECK(triangle_set(run.triangulation.tris) == triangle_set(hull.triangles));
    }
  }
}

TEST_CASE("flip count is bounded by the union stencil cardinality") {
  CounterRng rng(17);
  auto g = lattice_square(3);
  auto T0 = standard_delaunay(g);
  auto VT = stencils_of_triangulation(T0);
  for (std::uint64_t t = 0; t < 6; ++t) {
    auto u = perturbed_q(g, rng, t);
    auto run = flip_to_u_delaunay(standard_delaunay(g), u);
    auto Vu = minimal_stencils_for(g, u);
    CHECK(run.flip_count <= stencil_union(VT, Vu).count());
  }
}

TEST_CASE("flipping requires discretely convex data") {
  auto g = lattice_square(2);
  std::vector<double> u(static_cast<std::size_t>(g.size()), 0.0);
  u[static_cast<std::size_t>(g.index_of({0, 0}))] = 5.0;  // a spike, far from convex
  CHECK_THROWS_AS(flip_to_u_delaunay(standard_delaunay(g), u), std::runtime_error);
}

TEST_CASE("in-circle predicate") {
  CHECK(in_circle({2, 1}, {1, 1}, 0) == 0);
  CHECK(in_circle({1, 0}, {0, 1}, 1) == 0);
  CHECK(in_circle({1, 1}, {1, 0}, 1) == 2);
  CHECK(in_circle({2, 1}, {1, 1}, 3) == 6 * 5 + 6 * 3);
  CHECK_THROWS_AS(in_circle({2, 1}, {0, 2}, 1), std::invalid_argument);
}

TEST_CASE("stencils of a triangulation") {
  auto g = lattice_square(2);
  auto T = standard_delaunay(g);
  auto V = stencils_of_triangulation(T);
  CHECK_FALSE(validate(V).has_value());

  // For a standard Delaunay triangulation the stencil is exactly the edge set.
  std::vector<std::set<Vec2i, Vec2iLess>> edges(static_cast<std::size_t>(g.size()));
  for (std::size_t t = 0; t < T.size(); ++t)
    for (int i = 0; i < 3; ++i) {
      PointIndex v = T.tris[t][static_cast<std::size_t>(i)];
      PointIndex w = T.tris[t][static_cast<std::size_t>((i + 1) % 3)];
      edges[static_cast<std::size_t>(v)].insert(g.point(w) - g.point(v));
      edges[static_cast<std::size_t>(w)].insert(g.point(v) - g.point(w));
    }
  for (PointIndex i = 0; i < g.size(); ++i) {
    std::set<Vec2i, Vec2iLess> got(V.at(i).begin(), V.at(i).end());
    CHECK(got == edges[static_cast<std::size_t>(i)]);
  }
  CHECK(V.count() == 2 * T.edge_count());
  CHECK(V.count() <= 6 * (static_cast<long long>(g.size()) - 2));

  // A generic triangulation obeys the diameter-weighted bound.
  auto sweep = sweep_triangulation(g);
  validate_triangulation(sweep);
  auto Vs = stencils_of_triangulation(sweep);
  CHECK(Vs.count() <=
        6 * (static_cast<long long>(g.size()) - 2) * (g.lattice_diameter() + 2));
}

TEST_CASE("subgradient cells") {
  auto g = lattice_square(2);
  auto q = q_values(g);
  auto cells = subgradient_cells(g, q);
  for (PointIndex i = 0; i < g.size(); ++i) {
    const auto& cell = cells.cells[static_cast<std::size_t>(i)];
    if (norm_inf(g.point(i)) < 2) {
      CHECK(cell.interior);
      CHECK(cell.area == Catch::Approx(1.0).margin(1e-12));
      CHECK(cell.det_estimate == Catch::Approx(1.0).margin(1e-12));
    } else {
      CHECK_FALSE(cell.interior);
    }
  }

  std::vector<double> affine(static_cast<std::size_t>(g.size()));
  for (PointIndex i = 0; i < g.size(); ++i)
    affine[static_cast<std::size_t>(i)] = 0.5 * g.point(i).a - 2.0 * g.point(i).b;
  cells = subgradient_cells(g, affine);
  double total = 0;
  for (const auto& cell : cells.cells)
    if (cell.interior) total += cell.area;
  CHECK(total == Catch::Approx(0.0).margin(1e-12));

  // Max of two affine maps: crease cells degenerate to segments.
  std::vector<double> crease(static_cast<std::size_t>(g.size()));
  for (PointIndex i = 0; i < g.size(); ++i)
    crease[static_cast<std::size_t>(i)] = std::max(0.0, static_cast<double>(g.point(i).a));
  cells = subgradient_cells(g, crease);
  for (const auto& cell : cells.cells)
    if (cell.interior) CHECK(cell.area == Catch::Approx(0.0).margin(1e-12));

  // Total cell area of the q lift equals the gradient-range area of the
  // interior (one unit cell per interior point).
  cells = subgradient_cells(g, q);
  total = 0;
  for (const auto& cell : cells.cells)
    if (cell.interior) total += cell.area;
  CHECK(total == Catch::Approx(9.0).margin(1e-9));
}

TEST_CASE("naive Hessian determinant") {
  auto g = lattice_square(2);
  auto naive = hessian_det_naive(g, q_values(g));
  for (PointIndex i = 0; i < g.size(); ++i)
    if (norm_inf(g.point(i)) < 2)
      CHECK(naive[static_cast<std::size_t>(i)] == Catch::Approx(1.0).margin(1e-12));

  std::vector<double> affine(static_cast<std::size_t>(g.size()));
  for (PointIndex i = 0; i < g.size(); ++i)
    affine[static_cast<std::size_t>(i)] = 3.0 * g.point(i).a + 0.5;
  naive = hessian_det_naive(g, affine);
  for (PointIndex i = 0; i < g.size(); ++i)
    if (norm_inf(g.point(i)) < 2)
      CHECK(naive[static_cast<std::size_t>(i)] == Catch::Approx(0.0).margin(1e-12));

  // A diagonal crease max(0, z1+z2) drives the centered-difference estimate
  // negative next to the crease, unlike the subgradient measure.
  std::vector<double> crease(static_cast<std::size_t>(g.size()));
  for (PointIndex i = 0; i < g.size(); ++i)
    crease[static_cast<std::size_t>(i)] =
        std::max(0.0, static_cast<double>(g.point(i).a + g.point(i).b));
  naive = hessian_det_naive(g, crease);
  double lowest = 0;
  for (PointIndex i = 0; i < g.size(); ++i)
    if (norm_inf(g.point(i)) < 2) lowest = std::min(lowest, naive[static_cast<std::size_t>(i)]);
  CHECK(lowest < -0.05);  // -1/16 next to the crease
  auto cells = subgradient_cells(g, crease);
  for (const auto& cell : cells.cells)
    if (cell.interior) CHECK(cell.det_estimate >= -1e-12);
}
