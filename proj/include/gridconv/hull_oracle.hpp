#pragma once

// Ground-truth geometry: 3D lower convex hull of lifted sites by exhaustive
// plane enumeration, convex envelope values, and extensibility tests. Built
// for trust, not speed (quartic in the site count; intended for N <= 200).
// Plane tests are exact integers whenever the inputs are integral.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "gridconv/grid.hpp"

namespace gridconv {

struct LiftedHull {
  std::vector<Vec2d> sites;
  std::vector<double> values;
  std::vector<std::array<int, 3>> triangles;  // lower-hull faces, fan-triangulated
  std::vector<bool> on_hull;
  std::vector<double> envelope;  // largest convex minorant evaluated at the sites
};

namespace detail {

struct Lift {
  double x, y, z;
  bool integral;
  long long xi, yi, zi;
};

inline bool integral_value(double v, long long& out) {
  if (!(std::abs(v) < static_cast<double>(Int{1} << 20))) return false;
  double r = std::nearbyint(v);
  if (r != v) return false;
  out = static_cast<long long>(r);
  return true;
}

}  // namespace detail

inline LiftedHull lower_hull(std::span<const Vec2d> sites, std::span<const double> values) {
  const int n = static_cast<int>(sites.size());
  if (sites.size() != values.size()) throw std::invalid_argument("lower_hull: size mismatch");
  if (n < 3) throw std::invalid_argument("lower_hull: need at least 3 sites");

  std::vector<detail::Lift> P(static_cast<std::size_t>(n));
  bool all_integral = true;
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    auto& p = P[static_cast<std::size_t>(i)];
    p.x = sites[static_cast<std::size_t>(i)].x;
    p.y = sites[static_cast<std::size_t>(i)].y;
    p.z = values[static_cast<std::size_t>(i)];
    p.integral = detail::integral_value(p.x, p.xi) && detail::integral_value(p.y, p.yi) &&
                 detail::integral_value(p.z, p.zi);
    all_integral = all_integral && p.integral;
    scale = std::max({scale, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
  }
  const double tol = 1e-9 * scale;

  bool planar = false;
  for (int i = 0; i < n && !planar; ++i)
    for (int j = i + 1; j < n && !planar; ++j)
      for (int k = j + 1; k < n && !planar; ++k) {
        double c = (P[j].x - P[i].x) * (P[k].y - P[i].y) - (P[j].y - P[i].y) * (P[k].x - P[i].x);
        planar = std::abs(c) > tol;
      }
  if (!planar) throw std::invalid_argument("lower_hull: all base points collinear");

  LiftedHull hull;
  hull.sites.assign(sites.begin(), sites.end());
  hull.values.assign(values.begin(), values.end());
  hull.on_hull.assign(static_cast<std::size_t>(n), false);
  hull.envelope.assign(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());

  // Faces keyed by their sorted on-plane site set, so coplanar triples are
  // collapsed into a single face.
  std::map<std::vector<int>, std::array<double, 4>> faces;  // key -> plane (nx,ny,nz,d)

  std::vector<int> on_plane;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const auto &A = P[static_cast<std::size_t>(i)], &B = P[static_cast<std::size_t>(j)],
                   &C = P[static_cast<std::size_t>(k)];
        bool valid;
        on_plane.clear();
        double nx, ny, nz, d;
        if (all_integral) {
          // n = (B-A) x (C-A), oriented nz > 0; site below <=> dot(n, D-A) < 0.
          const long long ux = B.xi - A.xi, uy = B.yi - A.yi, uz = B.zi - A.zi;
          const long long vx = C.xi - A.xi, vy = C.yi - A.yi, vz = C.zi - A.zi;
          long long cnx = uy * vz - uz * vy, cny = uz * vx - ux * vz, cnz = ux * vy - uy * vx;
          if (cnz == 0) continue;  // base points collinear
          if (cnz < 0) { cnx = -cnx; cny = -cny; cnz = -cnz; }
          valid = true;
          for (int m = 0; m < n && valid; ++m) {
            const auto& D = P[static_cast<std::size_t>(m)];
            __int128 w = static_cast<__int128>(cnx) * (D.xi - A.xi) +
                         static_cast<__int128>(cny) * (D.yi - A.yi) +
                         static_cast<__int128>(cnz) * (D.zi - A.zi);
            if (w < 0) valid = false;
            else if (w == 0) on_plane.push_back(m);
          }
          nx = static_cast<double>(cnx); ny = static_cast<double>(cny); nz = static_cast<double>(cnz);
          d = nx * A.x + ny * A.y + nz * A.z;
        } else {
          const long double ux = B.x - A.x, uy = B.y - A.y, uz = B.z - A.z;
          const long double vx = C.x - A.x, vy = C.y - A.y, vz = C.z - A.z;
          long double cnx = uy * vz - uz * vy, cny = uz * vx - ux * vz, cnz = ux * vy - uy * vx;
          if (std::abs(static_cast<double>(cnz)) <= tol * tol) continue;
          if (cnz < 0) { cnx = -cnx; cny = -cny; cnz = -cnz; }
          valid = true;
          for (int m = 0; m < n && valid; ++m) {
            const auto& D = P[static_cast<std::size_t>(m)];
            long double w = cnx * (D.x - A.x) + cny * (D.y - A.y) + cnz * (D.z - A.z);
            if (w < -tol * cnz) valid = false;
            else if (w <= tol * cnz) on_plane.push_back(m);
          }
          nx = static_cast<double>(cnx); ny = static_cast<double>(cny); nz = static_cast<double>(cnz);
          d = nx * A.x + ny * A.y + nz * A.z;
        }
        if (!valid) continue;
        for (int m = 0; m < n; ++m) {
          double plane_val = (d - nx * P[static_cast<std::size_t>(m)].x - ny * P[static_cast<std::size_t>(m)].y) / nz;
          hull.envelope[static_cast<std::size_t>(m)] = std::max(hull.envelope[static_cast<std::size_t>(m)], plane_val);
        }
        faces.emplace(on_plane, std::array<double, 4>{nx, ny, nz, d});
      }

  for (int m = 0; m < n; ++m) {
    hull.envelope[static_cast<std::size_t>(m)] =
        std::min(hull.envelope[static_cast<std::size_t>(m)], hull.values[static_cast<std::size_t>(m)]);
    hull.on_hull[static_cast<std::size_t>(m)] =
        hull.envelope[static_cast<std::size_t>(m)] >= hull.values[static_cast<std::size_t>(m)] - tol;
  }

  // Deterministic fan triangulation of each face from its lexicographically
  // smallest site, remaining vertices in CCW order around the centroid.
  for (const auto& [members, plane] : faces) {
    if (members.size() < 3) continue;
    std::vector<int> verts = members;
    auto lex_less = [&](int a, int b) {
      const auto &p = hull.sites[static_cast<std::size_t>(a)], &q = hull.sites[static_cast<std::size_t>(b)];
      return p.x != q.x ? p.x < q.x : p.y < q.y;
    };
    std::iter_swap(verts.begin(), std::min_element(verts.begin(), verts.end(), lex_less));
    Vec2d c{0, 0};
    for (int v : verts) c = c + hull.sites[static_cast<std::size_t>(v)];
    c = c * (1.0 / static_cast<double>(verts.size()));
    std::sort(verts.begin() + 1, verts.end(), [&](int a, int b) {
      Vec2d pa = hull.sites[static_cast<std::size_t>(a)] - c, pb = hull.sites[static_cast<std::size_t>(b)] - c;
      double ta = std::atan2(pa.y, pa.x), tb = std::atan2(pb.y, pb.x);
      return ta != tb ? ta < tb : lex_less(a, b);
    });
    // Rotate so the fan apex is verts[0] again after the angular sort.
    // (min_element picked it; sorting the tail keeps it in place.)
    for (std::size_t t = 1; t + 1 < verts.size(); ++t) {
      std::array<int, 3> tri{verts[0], verts[t], verts[t + 1]};
      const auto &a = hull.sites[static_cast<std::size_t>(tri[0])], &b = hull.sites[static_cast<std::size_t>(tri[1])],
                 &cc = hull.sites[static_cast<std::size_t>(tri[2])];
      if (cross(b - a, cc - a) < 0) std::swap(tri[1], tri[2]);
      if (std::abs(cross(b - a, cc - a)) > 0) hull.triangles.push_back(tri);
    }
  }
  std::sort(hull.triangles.begin(), hull.triangles.end());
  return hull;
}

inline LiftedHull lower_hull(const GridDomain& grid, std::span<const double> u) {
  if (u.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("lower_hull: size mismatch");
  std::vector<Vec2d> sites(static_cast<std::size_t>(grid.size()));
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i z = grid.point(i);
    sites[static_cast<std::size_t>(i)] = {static_cast<double>(z.a), static_cast<double>(z.b)};
  }
  return lower_hull(sites, u);
}

// Value at each site of the largest convex function <= u on X.
inline std::vector<double> convex_envelope(const GridDomain& grid, std::span<const double> u) {
  return lower_hull(grid, u).envelope;
}

// True iff u equals its convex envelope on X within tol, i.e. u in Conv(X).
inline bool is_extensible(const GridDomain& grid, std::span<const double> u, double tol) {
  LiftedHull hull = lower_hull(grid, u);
  for (PointIndex i = 0; i < grid.size(); ++i)
    if (u[static_cast<std::size_t>(i)] - hull.envelope[static_cast<std::size_t>(i)] > tol) return false;
  return true;
}

}  // namespace gridconv
