#pragma once

// Discretization of a convex polygonal domain as X = Omega ∩ h R_theta(xi + Z^2),
// with O(1) lattice-point lookup and maximal stencil queries.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gridconv/geometry.hpp"
#include "gridconv/lattice.hpp"

namespace gridconv {

using PointIndex = std::int32_t;

class GridDomain {
 public:
  // Enumerates the lattice points z with h R_theta(xi + z) in the (closed)
  // domain, ordered lexicographically. Throws if fewer than 3 points remain.
  static GridDomain build(ConvexPolygon domain, double h, double theta, Vec2d xi) {
    if (h <= 0) throw std::invalid_argument("build_grid: h must be positive");
    GridDomain grid(std::move(domain), h, theta, xi);
    if (grid.size() < 3) throw std::runtime_error("build_grid: degenerate domain (fewer than 3 grid points)");
    return grid;
  }

  // Unchecked variant for degenerate study grids (explicit lattice points,
  // canonical parameters h=1, theta=0, xi=0).
  static GridDomain from_points(std::vector<Vec2i> pts) {
    return GridDomain(std::move(pts));
  }

  // Axis-aligned n x n grid on [lo,hi]^2 (n >= 2), lattice step h=(hi-lo)/(n-1).
  static GridDomain square(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("square grid: n must be >= 2");
    const double h = (hi - lo) / (n - 1);
    return build(ConvexPolygon::rectangle(lo, lo, hi, hi), h, 0.0, {lo / h, lo / h});
  }

  const ConvexPolygon& domain() const { return domain_; }
  double h() const { return h_; }
  double theta() const { return theta_; }
  Vec2d xi() const { return xi_; }
  PointIndex size() const { return static_cast<PointIndex>(points_.size()); }
  const std::vector<Vec2i>& points() const { return points_; }
  Vec2i point(PointIndex i) const { return points_[static_cast<std::size_t>(i)]; }

  // Physical embedding h R_theta(xi + z).
  Vec2d embed(Vec2i z) const {
    Vec2d p{xi_.x + static_cast<double>(z.a), xi_.y + static_cast<double>(z.b)};
    return rotate(p, theta_) * h_;
  }
  Vec2d embed(PointIndex i) const { return embed(point(i)); }

  bool contains(Vec2i z) const { return find(z) >= 0; }

  // Index of lattice point z, or -1.
  PointIndex find(Vec2i z) const {
    if (z.a < lo_.a || z.a > hi_.a || z.b < lo_.b || z.b > hi_.b) return -1;
    return index_[static_cast<std::size_t>((z.a - lo_.a) * (hi_.b - lo_.b + 1) + (z.b - lo_.b))];
  }

  PointIndex index_of(Vec2i z) const {
    PointIndex i = find(z);
    if (i < 0) throw std::out_of_range("GridDomain: lattice point not in X");
    return i;
  }

  Vec2i lattice_min() const { return lo_; }
  Vec2i lattice_max() const { return hi_; }

  // Max over points of ||z||_inf distance between lattice points (grid units).
  Int lattice_diameter() const {
    return std::max(hi_.a - lo_.a, hi_.b - lo_.b);
  }

  // V_max(x) := { e irreducible : x + e in X }.
  std::vector<Vec2i> max_stencil(PointIndex i) const {
    Vec2i x = point(i);
    std::vector<Vec2i> out;
    for (const Vec2i& y : points_) {
      Vec2i e = y - x;
      if (e == Vec2i{0, 0}) continue;
      if (is_irreducible(e)) out.push_back(e);
    }
    return out;
  }

  // Visit every e in V_max(x) without materializing.
  template <typename F>
  void for_each_max_stencil(PointIndex i, F&& f) const {
    Vec2i x = point(i);
    for (const Vec2i& y : points_) {
      Vec2i e = y - x;
      if (e == Vec2i{0, 0}) continue;
      if (is_irreducible(e)) f(e);
    }
  }

 private:
  GridDomain(ConvexPolygon domain, double h, double theta, Vec2d xi)
      : domain_(std::move(domain)), h_(h), theta_(theta), xi_(xi) {
    auto [blo, bhi] = domain_.bounds();
    // Conservative lattice bounding box: invert the embedding of the four
    // domain box corners and pad by one cell.
    double zx_min = 1e300, zx_max = -1e300, zy_min = 1e300, zy_max = -1e300;
    for (Vec2d corner : {Vec2d{blo.x, blo.y}, Vec2d{bhi.x, blo.y}, Vec2d{bhi.x, bhi.y}, Vec2d{blo.x, bhi.y}}) {
      Vec2d z = rotate(corner * (1.0 / h_), -theta_) - xi_;
      zx_min = std::min(zx_min, z.x); zx_max = std::max(zx_max, z.x);
      zy_min = std::min(zy_min, z.y); zy_max = std::max(zy_max, z.y);
    }
    lo_ = {static_cast<Int>(std::floor(zx_min)) - 1, static_cast<Int>(std::floor(zy_min)) - 1};
    hi_ = {static_cast<Int>(std::ceil(zx_max)) + 1, static_cast<Int>(std::ceil(zy_max)) + 1};
    check_coord_range(lo_);
    check_coord_range(hi_);

    // Boundary points are included: Omega is compact.
    const double tol = 1e-12 * h_;
    index_.assign(static_cast<std::size_t>((hi_.a - lo_.a + 1) * (hi_.b - lo_.b + 1)), -1);
    for (Int a = lo_.a; a <= hi_.a; ++a)
      for (Int b = lo_.b; b <= hi_.b; ++b) {
        Vec2i z{a, b};
        if (!domain_.contains(embed(z), tol)) continue;
        index_[static_cast<std::size_t>((a - lo_.a) * (hi_.b - lo_.b + 1) + (b - lo_.b))] =
            static_cast<PointIndex>(points_.size());
        points_.push_back(z);
      }
  }

  explicit GridDomain(std::vector<Vec2i> pts) : h_(1.0), theta_(0.0), xi_{0, 0} {
    if (pts.empty()) throw std::invalid_argument("from_points: empty point set");
    std::sort(pts.begin(), pts.end(), Vec2iLess{});
    points_ = std::move(pts);
    lo_ = hi_ = points_[0];
    for (const Vec2i& z : points_) {
      lo_.a = std::min(lo_.a, z.a); lo_.b = std::min(lo_.b, z.b);
      hi_.a = std::max(hi_.a, z.a); hi_.b = std::max(hi_.b, z.b);
    }
    index_.assign(static_cast<std::size_t>((hi_.a - lo_.a + 1) * (hi_.b - lo_.b + 1)), -1);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const Vec2i z = points_[i];
      auto& slot = index_[static_cast<std::size_t>((z.a - lo_.a) * (hi_.b - lo_.b + 1) + (z.b - lo_.b))];
      if (slot >= 0) throw std::invalid_argument("from_points: duplicate lattice point");
      slot = static_cast<PointIndex>(i);
    }
    // Degenerate test grids keep the polygon as the lattice bounding box.
    domain_ = ConvexPolygon::rectangle(lo_.a - 0.5, lo_.b - 0.5, hi_.a + 0.5, hi_.b + 0.5);
  }

  ConvexPolygon domain_;
  double h_;
  double theta_;
  Vec2d xi_;
  Vec2i lo_{0, 0}, hi_{0, 0};
  std::vector<Vec2i> points_;
  std::vector<PointIndex> index_;
};

// q(z) := ||z||^2 / 2 evaluated on lattice (grid-unit) coordinates.
inline double q_lattice(Vec2i z) { return 0.5 * static_cast<double>(norm2(z)); }

// Values of q on the whole grid, in grid units.
inline std::vector<double> q_values(const GridDomain& grid) {
  std::vector<double> u(static_cast<std::size_t>(grid.size()));
  for (PointIndex i = 0; i < grid.size(); ++i) u[static_cast<std::size_t>(i)] = q_lattice(grid.point(i));
  return u;
}

}  // namespace gridconv
