#pragma once

// Triangulations of X with half-edge-style adjacency, generalized (lifted)
// Delaunay checks, edge flipping toward a u-Delaunay triangulation, the exact
// in-circle predicate, subgradient cells and Hessian-determinant estimates.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "gridconv/constraints.hpp"
#include "gridconv/grid.hpp"
#include "gridconv/stencils.hpp"

namespace gridconv {

struct Triangulation {
  const GridDomain* grid = nullptr;
  std::vector<std::array<PointIndex, 3>> tris;  // CCW in lattice coordinates
  std::vector<std::array<int, 3>> nbr;          // nbr[t][i]: across edge opposite vertex i, -1 on boundary

  std::size_t size() const { return tris.size(); }

  Vec2i lattice(PointIndex v) const { return grid->point(v); }

  long long edge_count() const {
    long long twice = 0;
    for (std::size_t t = 0; t < tris.size(); ++t)
      for (int i = 0; i < 3; ++i) twice += nbr[t][static_cast<std::size_t>(i)] >= 0 ? 1 : 2;
    return twice / 2;
  }
};

namespace detail {

inline std::uint64_t edge_key(PointIndex a, PointIndex b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

inline void build_adjacency(Triangulation& T) {
  std::unordered_map<std::uint64_t, std::pair<int, int>> open;
  open.reserve(T.tris.size() * 2);
  T.nbr.assign(T.tris.size(), {-1, -1, -1});
  for (int t = 0; t < static_cast<int>(T.tris.size()); ++t)
    for (int i = 0; i < 3; ++i) {
      PointIndex a = T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 1) % 3)];
      PointIndex b = T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 2) % 3)];
      auto [it, fresh] = open.try_emplace(edge_key(a, b), std::pair<int, int>{t, i});
      if (!fresh) {
        auto [t2, i2] = it->second;
        T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = t2;
        T.nbr[static_cast<std::size_t>(t2)][static_cast<std::size_t>(i2)] = t;
        open.erase(it);
      }
    }
}

}  // namespace detail

// Triangulation of all of X by a lexicographic sweep: each point, taken in
// lattice order, is fanned to the strictly visible edges of the running hull.
inline Triangulation sweep_triangulation(const GridDomain& grid) {
  const PointIndex n = grid.size();
  if (n < 3) throw std::invalid_argument("sweep_triangulation: need at least 3 points");
  // Grid points are already lexicographically sorted.
  Triangulation T;
  T.grid = &grid;

  // Leading collinear run.
  PointIndex k = 2;
  while (k < n) {
    Vec2i a = grid.point(0), b = grid.point(1), c = grid.point(k);
    if (det(b - a, c - a) != 0) break;
    ++k;
  }
  if (k == n) throw std::runtime_error("sweep_triangulation: all points collinear");

  std::vector<PointIndex> hull;  // CCW, may contain straight-angle vertices
  {
    Vec2i zc = grid.point(k);
    for (PointIndex i = 0; i + 1 < k; ++i) {
      Vec2i za = grid.point(i), zb = grid.point(i + 1);
      if (det(zb - za, zc - za) > 0)
        T.tris.push_back({i, static_cast<PointIndex>(i + 1), k});
      else
        T.tris.push_back({static_cast<PointIndex>(i + 1), i, k});
    }
    // Hull: the collinear chain plus the apex, oriented CCW.
    Vec2i za = grid.point(0), zb = grid.point(static_cast<PointIndex>(k - 1));
    if (det(zb - za, zc - za) > 0) {
      for (PointIndex i = 0; i < k; ++i) hull.push_back(i);
      hull.push_back(k);
    } else {
      for (PointIndex i = k; i-- > 0;) hull.push_back(i);
      hull.push_back(k);
    }
  }

  for (PointIndex p = static_cast<PointIndex>(k + 1); p < n; ++p) {
    Vec2i zp = grid.point(p);
    const int m = static_cast<int>(hull.size());
    std::vector<bool> visible(static_cast<std::size_t>(m));
    int nvis = 0;
    for (int i = 0; i < m; ++i) {
      Vec2i za = grid.point(hull[static_cast<std::size_t>(i)]);
      Vec2i zb = grid.point(hull[static_cast<std::size_t>((i + 1) % m)]);
      visible[static_cast<std::size_t>(i)] = det(zb - za, zp - za) < 0;
      nvis += visible[static_cast<std::size_t>(i)];
    }
    if (nvis == 0) throw std::logic_error("sweep_triangulation: no visible edge");
    // The visible edges form one contiguous arc; locate its start.
    int start = 0;
    while (!(visible[static_cast<std::size_t>(start)] &&
             !visible[static_cast<std::size_t>((start + m - 1) % m)]))
      ++start;
    for (int i = 0; i < nvis; ++i) {
      int e = (start + i) % m;
      T.tris.push_back({hull[static_cast<std::size_t>(e)], p, hull[static_cast<std::size_t>((e + 1) % m)]});
    }
    std::vector<PointIndex> next;
    next.reserve(static_cast<std::size_t>(m - nvis + 2));
    for (int i = 0; i <= m - nvis; ++i) next.push_back(hull[static_cast<std::size_t>((start + nvis + i) % m)]);
    next.push_back(p);
    hull = std::move(next);
  }

  detail::build_adjacency(T);
  return T;
}

// Quadrilateral around the interior edge opposite vertex i of triangle t:
// shared edge (a,b), opposite corners c (in t) and d (in the neighbor).
struct EdgeQuad {
  PointIndex a, b, c, d;
  int t2, i2;
};

inline std::optional<EdgeQuad> edge_quad(const Triangulation& T, int t, int i) {
  int t2 = T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
  if (t2 < 0) return std::nullopt;
  EdgeQuad q;
  q.c = T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
  q.a = T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 1) % 3)];
  q.b = T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 2) % 3)];
  q.t2 = t2;
  q.i2 = -1;
  for (int j = 0; j < 3; ++j)
    if (T.nbr[static_cast<std::size_t>(t2)][static_cast<std::size_t>(j)] == t) q.i2 = j;
  if (q.i2 < 0) throw std::logic_error("edge_quad: inconsistent adjacency");
  q.d = T.tris[static_cast<std::size_t>(q.t2)][static_cast<std::size_t>(q.i2)];
  return q;
}

// Convexity violation of the lifted fold across an interior edge:
// u(c)+u(d) - u(a)-u(b) for the parallelogram case (c+d = a+b), the general
// plane test otherwise. Negative means the fold is non-convex.
inline double fold_excess(const Triangulation& T, std::span<const double> u, const EdgeQuad& q) {
  const Vec2i zc = T.lattice(q.c), zd = T.lattice(q.d), za = T.lattice(q.a), zb = T.lattice(q.b);
  const double uc = u[static_cast<std::size_t>(q.c)], ud = u[static_cast<std::size_t>(q.d)],
               ua = u[static_cast<std::size_t>(q.a)], ub = u[static_cast<std::size_t>(q.b)];
  if (zc + zd == za + zb) return uc + ud - ua - ub;
  // Lifted d against the plane of the triangle (c,a,b): excess is
  // (ud - uc) - <G, zd - zc> with G the interpolation gradient.
  const Vec2i e1 = za - zc, e2 = zb - zc, ed = zd - zc;
  const double da = ua - uc, db = ub - uc;
  const double area2 = static_cast<double>(det(e1, e2));
  const double gdot = ((da * static_cast<double>(e2.b) - db * static_cast<double>(e1.b)) *
                           static_cast<double>(ed.a) +
                       (db * static_cast<double>(e1.a) - da * static_cast<double>(e2.a)) *
                           static_cast<double>(ed.b)) /
                      area2;
  return (ud - uc) - gdot;
}

inline bool is_u_delaunay(const Triangulation& T, std::span<const double> u, double tol) {
  for (int t = 0; t < static_cast<int>(T.size()); ++t)
    for (int i = 0; i < 3; ++i) {
      int t2 = T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      if (t2 < t) continue;  // visit each interior edge once
      auto q = edge_quad(T, t, i);
      if (q && fold_excess(T, u, *q) < -tol) return false;
    }
  return true;
}

// Replaces the shared edge (a,b) by (c,d); slots t and q.t2 now hold
// (c,a,d) and (c,d,b). Returns the two slots.
inline std::pair<int, int> flip_edge(Triangulation& T, int t, int i, const EdgeQuad& q) {
  const int t2 = q.t2;
  const int n_bc = T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 1) % 3)];   // across (b,c)
  const int n_ca = T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>((i + 2) % 3)];   // across (c,a)
  const int n_ad = T.nbr[static_cast<std::size_t>(t2)][static_cast<std::size_t>((q.i2 + 1) % 3)];  // across (a,d)
  const int n_db = T.nbr[static_cast<std::size_t>(t2)][static_cast<std::size_t>((q.i2 + 2) % 3)];  // across (d,b)

  T.tris[static_cast<std::size_t>(t)] = {q.c, q.a, q.d};
  T.tris[static_cast<std::size_t>(t2)] = {q.c, q.d, q.b};
  // t = (c,a,d): opposite c -> (a,d), opposite a -> (d,c), opposite d -> (c,a)
  T.nbr[static_cast<std::size_t>(t)] = {n_ad, t2, n_ca};
  // t2 = (c,d,b): opposite c -> (d,b), opposite d -> (b,c), opposite b -> (c,d)
  T.nbr[static_cast<std::size_t>(t2)] = {n_db, n_bc, t};

  auto relink = [&T](int nb, int was, int now) {
    if (nb < 0) return;
    for (int j = 0; j < 3; ++j)
      if (T.nbr[static_cast<std::size_t>(nb)][static_cast<std::size_t>(j)] == was)
        T.nbr[static_cast<std::size_t>(nb)][static_cast<std::size_t>(j)] = now;
  };
  relink(n_ad, t2, t);
  relink(n_bc, t, t2);
  return {t, t2};
}

// Edge-flips T until the interpolation of u is convex. Flips strictly
// decrease the interpolant at the flipped midpoint, so the run terminates;
// quads within tol of equality are left alone. For u in Conv(X) every
// non-convex fold is a unit parallelogram, which is exactly what gets
// flipped.
struct FlipResult {
  Triangulation triangulation;
  long long flip_count = 0;
};

inline FlipResult flip_to_u_delaunay(Triangulation T, std::span<const double> u,
                                     double tol_rel = 1e-9, bool check_convex = true) {
  if (u.size() != static_cast<std::size_t>(T.grid->size()))
    throw std::invalid_argument("flip_to_u_delaunay: size mismatch");
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double tol = tol_rel * scale;
  if (check_convex && convexity_defect(*T.grid, u, DefectMode::Full) > 100 * tol)
    throw std::runtime_error("flip_to_u_delaunay: u is not discretely convex");

  std::vector<std::pair<int, int>> stack;
  for (int t = 0; t < static_cast<int>(T.size()); ++t)
    for (int i = 0; i < 3; ++i)
      if (T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] > t) stack.emplace_back(t, i);

  long long flips = 0;
  const long long flip_cap =
      64LL * T.grid->size() * (T.grid->lattice_diameter() + 4) + (1 << 20);
  while (!stack.empty()) {
    auto [t, i] = stack.back();
    stack.pop_back();
    auto q = edge_quad(T, t, i);
    if (!q) continue;
    const Vec2i zc = T.lattice(q->c), zd = T.lattice(q->d), za = T.lattice(q->a), zb = T.lattice(q->b);
    if (!(zc + zd == za + zb)) continue;  // only parallelogram folds are flippable
    const double excess = u[static_cast<std::size_t>(q->c)] + u[static_cast<std::size_t>(q->d)] -
                          u[static_cast<std::size_t>(q->a)] - u[static_cast<std::size_t>(q->b)];
    if (excess >= -tol) continue;
    auto [t1, t2] = flip_edge(T, t, i, *q);
    if (++flips > flip_cap)
      throw std::runtime_error("flip_to_u_delaunay: flip budget exceeded (input far from convex?)");
    // Re-examine the four quad boundary edges.
    stack.emplace_back(t1, 0);
    stack.emplace_back(t1, 2);
    stack.emplace_back(t2, 0);
    stack.emplace_back(t2, 1);
  }
  return {std::move(T), flips};
}

// Standard Delaunay triangulation: flip the sweep triangulation under the
// grid-unit paraboloid lift. Cocircular quads (exact ties) are never flipped,
// so the result is deterministic.
inline Triangulation standard_delaunay(const GridDomain& grid) {
  Triangulation T = sweep_triangulation(grid);
  std::vector<double> q = q_values(grid);
  return flip_to_u_delaunay(std::move(T), q, 0.0, false).triangulation;
}

// Exact in-circle value k(k-1)||e||^2 + 2k<e,f> for the grid quad spanned by
// a direct basis (e,f) shifted k steps along e.
inline Int in_circle(Vec2i e, Vec2i f, Int k) {
  if (det(e, f) != 1 && det(e, f) != -1)
    throw std::invalid_argument("in_circle: (e,f) must be a lattice basis");
  return k * (k - 1) * norm2(e) + 2 * k * dot(e, f);
}

// Structure checks: positive unit-area triangles, consistent adjacency, total
// area matching Hull(X).
inline void validate_triangulation(const Triangulation& T) {
  if (T.grid == nullptr || T.tris.empty()) throw std::invalid_argument("triangulation: empty");
  long long area2 = 0;
  for (std::size_t t = 0; t < T.size(); ++t) {
    Vec2i a = T.lattice(T.tris[t][0]), b = T.lattice(T.tris[t][1]), c = T.lattice(T.tris[t][2]);
    Int d = det(b - a, c - a);
    if (d != 1) throw std::invalid_argument("triangulation: triangle not positive unit-area");
    area2 += d;
  }
  // Lattice hull area via the monotone chain over grid points.
  std::vector<Vec2i> pts = T.grid->points();
  auto chain_area2 = [&]() -> long long {
    std::vector<Vec2i> h;
    auto build = [&](auto begin, auto end) {
      std::size_t base = h.size();
      for (auto it = begin; it != end; ++it) {
        while (h.size() >= base + 2 && det(h[h.size() - 1] - h[h.size() - 2], *it - h[h.size() - 1]) <= 0)
          h.pop_back();
        h.push_back(*it);
      }
      h.pop_back();
    };
    build(pts.begin(), pts.end());
    build(pts.rbegin(), pts.rend());
    long long s = 0;
    for (std::size_t i = 0; i < h.size(); ++i) s += det(h[i], h[(i + 1) % h.size()]);
    return s;
  };
  if (area2 != chain_area2()) throw std::invalid_argument("triangulation: does not cover Hull(X)");
}

// Per-point stencils generated by the triangulation edges:
// V(x) = V_max(x) ∩ union of Anc(e) over edge offsets e at x.
inline StencilFamily stencils_of_triangulation(const Triangulation& T) {
  validate_triangulation(T);
  const GridDomain& grid = *T.grid;
  std::vector<std::vector<Vec2i>> edges(static_cast<std::size_t>(grid.size()));
  for (std::size_t t = 0; t < T.size(); ++t)
    for (int i = 0; i < 3; ++i) {
      PointIndex v = T.tris[t][static_cast<std::size_t>(i)];
      PointIndex w = T.tris[t][static_cast<std::size_t>((i + 1) % 3)];
      edges[static_cast<std::size_t>(v)].push_back(grid.point(w) - grid.point(v));
      edges[static_cast<std::size_t>(w)].push_back(grid.point(v) - grid.point(w));
    }
  for (auto& set : edges) {
    std::sort(set.begin(), set.end(), Vec2iLess{});
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  return stencils_from_edge_offsets(grid, edges);
}

// Gradient of the affine interpolation over a triangle, in embedded coords.
inline Vec2d triangle_gradient(const Triangulation& T, std::span<const double> u, std::size_t t) {
  Vec2d p0 = T.grid->embed(T.tris[t][0]), p1 = T.grid->embed(T.tris[t][1]), p2 = T.grid->embed(T.tris[t][2]);
  double d0 = u[static_cast<std::size_t>(T.tris[t][1])] - u[static_cast<std::size_t>(T.tris[t][0])];
  double d1 = u[static_cast<std::size_t>(T.tris[t][2])] - u[static_cast<std::size_t>(T.tris[t][0])];
  Vec2d e0 = p1 - p0, e1 = p2 - p0;
  double inv = 1.0 / cross(e0, e1);
  return {(d0 * e1.y - d1 * e0.y) * inv, (d1 * e0.x - d0 * e1.x) * inv};
}

struct SubgradientCell {
  bool interior = false;
  std::vector<Vec2d> polygon;  // gradient-space vertices, CCW
  double area = 0;
  double det_estimate = 0;  // area / h^2
};

struct SubgradientCellMap {
  std::vector<SubgradientCell> cells;  // indexed like grid points
};

// Subgradient cells of the convex interpolation of u: for each interior
// point, the polygon of incident-triangle gradients in cyclic order. The area
// over h^2 estimates det(Hessian) at the point.
inline SubgradientCellMap subgradient_cells(const GridDomain& grid, std::span<const double> u,
                                            double tol_rel = 1e-9) {
  FlipResult flip = flip_to_u_delaunay(standard_delaunay(grid), u, tol_rel);
  const Triangulation& T = flip.triangulation;

  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double merge_tol = 1e-7 * std::max(1.0, scale / grid.h());

  std::vector<std::pair<int, int>> at_vertex(static_cast<std::size_t>(grid.size()), {-1, -1});
  for (int t = 0; t < static_cast<int>(T.size()); ++t)
    for (int i = 0; i < 3; ++i)
      at_vertex[static_cast<std::size_t>(T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)])] = {t, i};

  SubgradientCellMap map;
  map.cells.resize(static_cast<std::size_t>(grid.size()));
  for (PointIndex v = 0; v < grid.size(); ++v) {
    auto [t0, c0] = at_vertex[static_cast<std::size_t>(v)];
    if (t0 < 0) continue;
    // Walk the fan CCW; an interior vertex comes back around.
    std::vector<int> fan;
    int t = t0, c = c0;
    bool closed = false;
    for (std::size_t guard = 0; guard <= T.size(); ++guard) {
      fan.push_back(t);
      // CCW around v: cross the edge from v to the far CCW vertex.
      int next = T.nbr[static_cast<std::size_t>(t)][static_cast<std::size_t>((c + 1) % 3)];
      if (next < 0) break;
      if (next == t0) { closed = true; break; }
      t = next;
      c = -1;
      for (int j = 0; j < 3; ++j)
        if (T.tris[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] == v) c = j;
      if (c < 0) throw std::logic_error("subgradient_cells: broken fan");
    }
    SubgradientCell& cell = map.cells[static_cast<std::size_t>(v)];
    cell.interior = closed;
    if (!closed) continue;
    for (int ft : fan) {
      Vec2d g = triangle_gradient(T, u, static_cast<std::size_t>(ft));
      if (!cell.polygon.empty()) {
        Vec2d last = cell.polygon.back();
        if (std::abs(last.x - g.x) <= merge_tol && std::abs(last.y - g.y) <= merge_tol) continue;
      }
      cell.polygon.push_back(g);
    }
    while (cell.polygon.size() > 1) {
      Vec2d first = cell.polygon.front(), last = cell.polygon.back();
      if (std::abs(first.x - last.x) <= merge_tol && std::abs(first.y - last.y) <= merge_tol)
        cell.polygon.pop_back();
      else
        break;
    }
    cell.area = std::max(0.0, polygon_area(cell.polygon));
    cell.det_estimate = cell.area / (grid.h() * grid.h());
  }
  return map;
}

// Centered second-difference Hessian determinant; the imprecise baseline.
// Points lacking a full 3x3 neighborhood get NaN.
inline std::vector<double> hessian_det_naive(const GridDomain& grid, std::span<const double> u) {
  const double h2 = grid.h() * grid.h();
  std::vector<double> out(static_cast<std::size_t>(grid.size()),
                          std::numeric_limits<double>::quiet_NaN());
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    PointIndex xe = grid.find(x + Vec2i{1, 0}), xw = grid.find(x - Vec2i{1, 0});
    PointIndex yn = grid.find(x + Vec2i{0, 1}), ys = grid.find(x - Vec2i{0, 1});
    PointIndex ne = grid.find(x + Vec2i{1, 1}), sw = grid.find(x - Vec2i{1, 1});
    PointIndex nw = grid.find(x + Vec2i{-1, 1}), se = grid.find(x - Vec2i{-1, 1});
    if (xe < 0 || xw < 0 || yn < 0 || ys < 0 || ne < 0 || sw < 0 || nw < 0 || se < 0) continue;
    auto U = [&](PointIndex j) { return u[static_cast<std::size_t>(j)]; };
    double uxx = (U(xe) - 2 * U(i) + U(xw)) / h2;
    double uyy = (U(yn) - 2 * U(i) + U(ys)) / h2;
    double uxy = (U(ne) - U(nw) - U(se) + U(sw)) / (4 * h2);
    out[static_cast<std::size_t>(i)] = uxx * uyy - uxy * uxy;
  }
  return out;
}

// OFF-style text export (vertices in embedded coordinates, then triangles).
inline void export_off(const Triangulation& T, const std::string& path,
                       std::span<const double> u = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "OFF\n" << T.grid->size() << " " << T.size() << " 0\n";
  for (PointIndex i = 0; i < T.grid->size(); ++i) {
    Vec2d p = T.grid->embed(i);
    double z = u.empty() ? 0.0 : u[static_cast<std::size_t>(i)];
    out << p.x << " " << p.y << " " << z << "\n";
  }
  for (const auto& t : T.tris) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace gridconv
