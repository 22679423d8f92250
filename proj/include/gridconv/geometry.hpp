#pragma once

// Small 2D real-plane kit: points, convex polygons, membership, clipping,
// areas. Enough for domain handling and exact per-triangle integration.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gridconv {

struct Vec2d {
  double x = 0;
  double y = 0;

  friend constexpr bool operator==(const Vec2d&, const Vec2d&) = default;
  constexpr Vec2d operator+(Vec2d o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2d operator-(Vec2d o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2d operator*(double s) const { return {x * s, y * s}; }
};

constexpr double cross(Vec2d u, Vec2d v) { return u.x * v.y - u.y * v.x; }
constexpr double dot(Vec2d u, Vec2d v) { return u.x * v.x + u.y * v.y; }
inline double norm(Vec2d u) { return std::hypot(u.x, u.y); }

inline Vec2d rotate(Vec2d p, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

// Counterclockwise, strictly convex vertex list with nonempty interior.
struct ConvexPolygon {
  std::vector<Vec2d> vertices;

  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Vec2d> verts) : vertices(std::move(verts)) {
    if (vertices.size() < 3) throw std::invalid_argument("ConvexPolygon: need >= 3 vertices");
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      Vec2d a = vertices[i], b = vertices[(i + 1) % n], c = vertices[(i + 2) % n];
      if (cross(b - a, c - b) <= 0)
        throw std::invalid_argument("ConvexPolygon: vertices not strictly convex CCW");
    }
  }

  static ConvexPolygon rectangle(double x0, double y0, double x1, double y1) {
    return ConvexPolygon({{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}});
  }

  // Axis-aligned square [lo,hi]^2 rotated by theta around its center.
  static ConvexPolygon rotated_square(double lo, double hi, double theta) {
    Vec2d c{(lo + hi) / 2, (lo + hi) / 2};
    std::vector<Vec2d> v{{lo, lo}, {hi, lo}, {hi, hi}, {lo, hi}};
    for (Vec2d& p : v) p = c + rotate(p - c, theta);
    return ConvexPolygon(std::move(v));
  }

  // Signed distance to the boundary is not needed; membership uses the raw
  // half-plane residuals cross(b-a, p-a) against edge-length-scaled tol.
  bool contains(Vec2d p, double tol = 0.0) const {
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      Vec2d a = vertices[i], b = vertices[(i + 1) % n];
      if (cross(b - a, p - a) < -tol * norm(b - a)) return false;
    }
    return true;
  }

  double area() const {
    double s = 0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) s += cross(vertices[i], vertices[(i + 1) % n]);
    return s / 2;
  }

  Vec2d centroid() const {
    double s = 0;
    Vec2d c{0, 0};
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      double w = cross(vertices[i], vertices[(i + 1) % n]);
      s += w;
      c = c + (vertices[i] + vertices[(i + 1) % n]) * w;
    }
    return c * (1.0 / (3.0 * s));
  }

  // Bounding box as (min, max).
  std::pair<Vec2d, Vec2d> bounds() const {
    Vec2d lo = vertices[0], hi = vertices[0];
    for (const Vec2d& v : vertices) {
      lo.x = std::min(lo.x, v.x); lo.y = std::min(lo.y, v.y);
      hi.x = std::max(hi.x, v.x); hi.y = std::max(hi.y, v.y);
    }
    return {lo, hi};
  }
};

// Sutherland-Hodgman clip of a convex subject polygon (vertex loop, CCW)
// against a convex clip polygon. Returns the (possibly empty) intersection.
inline std::vector<Vec2d> clip_convex(const std::vector<Vec2d>& subject,
                                      const ConvexPolygon& clip) {
  std::vector<Vec2d> poly = subject;
  const std::size_t n = clip.vertices.size();
  for (std::size_t i = 0; i < n && !poly.empty(); ++i) {
    Vec2d a = clip.vertices[i], b = clip.vertices[(i + 1) % n];
    Vec2d d = b - a;
    std::vector<Vec2d> next;
    const std::size_t m = poly.size();
    for (std::size_t j = 0; j < m; ++j) {
      Vec2d p = poly[j], q = poly[(j + 1) % m];
      double sp = cross(d, p - a), sq = cross(d, q - a);
      if (sp >= 0) next.push_back(p);
      if ((sp < 0) != (sq < 0)) {
        double t = sp / (sp - sq);
        next.push_back(p + (q - p) * t);
      }
    }
    poly = std::move(next);
  }
  return poly;
}

inline double polygon_area(const std::vector<Vec2d>& poly) {
  double s = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return s / 2;
}

}  // namespace gridconv
