#pragma once

// Stencil families V = (V(x))_{x in X}: per-point sets of irreducible offsets
// satisfying Stability (parents present whenever possible) and Visibility
// (directions covered). Sets are kept sorted by angle so consecutive-pair
// queries are O(1) neighbors.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridconv/forms.hpp"
#include "gridconv/grid.hpp"
#include "gridconv/lattice.hpp"

namespace gridconv {

class StencilFamily {
 public:
  explicit StencilFamily(const GridDomain& grid)
      : grid_(&grid), sets_(static_cast<std::size_t>(grid.size())) {}

  const GridDomain& grid() const { return *grid_; }
  PointIndex size() const { return static_cast<PointIndex>(sets_.size()); }
  const std::vector<Vec2i>& at(PointIndex i) const { return sets_[static_cast<std::size_t>(i)]; }

  bool contains(PointIndex i, Vec2i e) const {
    const auto& s = sets_[static_cast<std::size_t>(i)];
    auto it = std::lower_bound(s.begin(), s.end(), e, angle::angle_less);
    return it != s.end() && *it == e;
  }

  // Total cardinality #V with the identification V ~ {(x,e)}.
  long long count() const {
    long long n = 0;
    for (const auto& s : sets_) n += static_cast<long long>(s.size());
    return n;
  }

  void set(PointIndex i, std::vector<Vec2i> offsets) {
    std::sort(offsets.begin(), offsets.end(), angle::angle_less);
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    sets_[static_cast<std::size_t>(i)] = std::move(offsets);
  }

  void insert(PointIndex i, Vec2i e) {
    auto& s = sets_[static_cast<std::size_t>(i)];
    auto it = std::lower_bound(s.begin(), s.end(), e, angle::angle_less);
    if (it == s.end() || !(*it == e)) s.insert(it, e);
  }

  friend bool operator==(const StencilFamily& a, const StencilFamily& b) {
    return a.grid_ == b.grid_ && a.sets_ == b.sets_;
  }

 private:
  const GridDomain* grid_;
  std::vector<std::vector<Vec2i>> sets_;
};

inline OffsetTable make_offset_table(const GridDomain& grid) {
  Vec2i lo = grid.lattice_min() - grid.lattice_max();
  Vec2i hi = grid.lattice_max() - grid.lattice_min();
  return OffsetTable(lo, hi);
}

// V_min(x): elements of V_max(x) with none or just one parent in V_max(x)
// (in particular all unit vectors of V_max(x)).
inline StencilFamily minimal_stencils(const GridDomain& grid) {
  const OffsetTable table = make_offset_table(grid);
  StencilFamily family(grid);
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    std::vector<Vec2i> set;
    for (const Vec2i& y : grid.points()) {
      Vec2i e = y - x;
      if (e == Vec2i{0, 0}) continue;
      const auto& ent = table.at(e);
      if (!ent.irreducible) continue;
      if (is_unit(e)) {
        set.push_back(e);
        continue;
      }
      int in_max = (grid.contains(x + ent.f) ? 1 : 0) + (grid.contains(x + ent.g) ? 1 : 0);
      if (in_max <= 1) set.push_back(e);
    }
    family.set(i, std::move(set));
  }
  return family;
}

struct StencilViolation {
  std::string property;  // "subset" | "stability" | "visibility"
  PointIndex point = -1;
  Vec2i offset{0, 0};
};

// First violated structural property, or nullopt if V is a valid family.
inline std::optional<StencilViolation> validate(const StencilFamily& V) {
  const GridDomain& grid = V.grid();
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    const auto& s = V.at(i);
    for (const Vec2i& e : s) {
      if (!is_irreducible(e) || !grid.contains(x + e))
        return StencilViolation{"subset", i, e};
      if (norm2(e) > 1) {
        Basis fg = parents(e);
        for (Vec2i p : {fg.f, fg.g})
          if (grid.contains(x + p) && !V.contains(i, p))
            return StencilViolation{"stability", i, e};
      }
    }
    // Visibility: no element of V_max(x) may fall strictly inside an angular
    // gap of V(x) spanning pi or more.
    if (s.empty()) {
      bool any = false;
      grid.for_each_max_stencil(i, [&](Vec2i) { any = true; });
      if (any) return StencilViolation{"visibility", i, {0, 0}};
      continue;
    }
    std::optional<StencilViolation> bad;
    grid.for_each_max_stencil(i, [&](Vec2i e) {
      if (bad || V.contains(i, e)) return;
      auto it = std::lower_bound(s.begin(), s.end(), e, angle::angle_less);
      Vec2i g = it == s.end() ? s.front() : *it;
      Vec2i f = it == s.begin() ? s.back() : *(it - 1);
      bool covered = s.size() >= 2 && det(f, g) > 0;
      if (!covered) bad = StencilViolation{"visibility", i, e};
    });
    if (bad) return bad;
  }
  return std::nullopt;
}

// Candidates for refinement: sums of trigonometrically consecutive direct
// acute pairs of V(x) that land in V_max(x).
inline std::vector<Vec2i> refinement_candidates(const StencilFamily& V, PointIndex i) {
  const GridDomain& grid = V.grid();
  Vec2i x = grid.point(i);
  const auto& s = V.at(i);
  std::vector<Vec2i> out;
  const std::size_t k = s.size();
  if (k < 2) return out;
  for (std::size_t j = 0; j < k; ++j) {
    Vec2i f = s[j], g = s[(j + 1) % k];
    if (det(f, g) != 1 || dot(f, g) < 0) continue;
    Vec2i e = f + g;
    if (grid.contains(x + e)) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), angle::angle_less);
  return out;
}

// Extended candidates H_rho(x): mediant-tree descendants of consecutive pairs
// (f',g') of V(x), kept while ||f|| ||g|| <= rho ||f'|| ||g'|| and x+e in X.
// rho = 1 reduces exactly to refinement_candidates.
inline std::vector<Vec2i> extended_candidates(const StencilFamily& V, PointIndex i, double rho) {
  if (rho < 1) throw std::invalid_argument("extended_candidates: rho must be >= 1");
  const GridDomain& grid = V.grid();
  Vec2i x = grid.point(i);
  const auto& s = V.at(i);
  std::vector<Vec2i> out;
  const std::size_t k = s.size();
  if (k < 2) return out;
  const long double rho2 = static_cast<long double>(rho) * rho;
  struct Pair { Vec2i f, g; };
  std::vector<Pair> stack;
  for (std::size_t j = 0; j < k; ++j) {
    Vec2i fp = s[j], gp = s[(j + 1) % k];
    if (det(fp, gp) != 1 || dot(fp, gp) < 0) continue;
    const long double base = static_cast<long double>(norm2(fp)) * static_cast<long double>(norm2(gp));
    stack.assign(1, Pair{fp, gp});
    while (!stack.empty()) {
      auto [f, g] = stack.back();
      stack.pop_back();
      const long double prod = static_cast<long double>(norm2(f)) * static_cast<long double>(norm2(g));
      if (prod > rho2 * base) continue;
      Vec2i e = f + g;
      // No descendant can re-enter X once x+e leaves it (X is convex).
      if (!grid.contains(x + e)) continue;
      out.push_back(e);
      stack.push_back(Pair{f, e});
      stack.push_back(Pair{e, g});
    }
  }
  std::sort(out.begin(), out.end(), angle::angle_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// New family with the given additions; offsets from extended candidate sets
// are closed under ancestors inside V_max(x) so Stability is preserved.
inline StencilFamily refine(const StencilFamily& V,
                            const std::vector<std::pair<PointIndex, Vec2i>>& additions) {
  const GridDomain& grid = V.grid();
  StencilFamily out = V;
  for (const auto& [i, e] : additions) {
    Vec2i x = grid.point(i);
    if (!is_irreducible(e) || !grid.contains(x + e))
      throw std::invalid_argument("refine: addition outside V_max");
    for (Vec2i anc : ancestors(e))
      if (grid.contains(x + anc)) out.insert(i, anc);
  }
  return out;
}

inline StencilFamily stencil_union(const StencilFamily& V, const StencilFamily& W) {
  if (&V.grid() != &W.grid()) throw std::invalid_argument("stencil_union: grid mismatch");
  StencilFamily out = V;
  for (PointIndex i = 0; i < V.size(); ++i)
    for (const Vec2i& e : W.at(i)) out.insert(i, e);
  return out;
}

inline StencilFamily stencil_intersection(const StencilFamily& V, const StencilFamily& W) {
  if (&V.grid() != &W.grid()) throw std::invalid_argument("stencil_intersection: grid mismatch");
  StencilFamily out(V.grid());
  for (PointIndex i = 0; i < V.size(); ++i) {
    std::vector<Vec2i> common;
    for (const Vec2i& e : V.at(i))
      if (W.contains(i, e)) common.push_back(e);
    out.set(i, std::move(common));
  }
  return out;
}

// Smallest family V with u in Conv(V), per the characterization
// e in V(x) (||e||>1)  <=>  P_x^e unsupported or P_x^e(u) < -tol.
// Unit vectors of V_max(x) are always included. By default membership of u in
// Conv(X) is not re-verified here; callers pass convex data.
inline StencilFamily minimal_stencils_for(const GridDomain& grid, std::span<const double> u,
                                          double tol_rel = 1e-9) {
  if (u.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("minimal_stencils_for: size mismatch");
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  const double tol = tol_rel * scale;

  const OffsetTable table = make_offset_table(grid);
  StencilFamily family(grid);
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    const double ux = u[static_cast<std::size_t>(i)];
    std::vector<Vec2i> set;
    for (PointIndex j = 0; j < grid.size(); ++j) {
      if (j == i) continue;
      Vec2i e = grid.point(j) - x;
      const auto& ent = table.at(e);
      if (!ent.irreducible) continue;
      if (is_unit(e)) {
        set.push_back(e);
        continue;
      }
      PointIndex pf = grid.find(x + ent.f), pg = grid.find(x + ent.g);
      if (pf < 0 || pg < 0) {
        set.push_back(e);  // P_x^e not supported on X
        continue;
      }
      const double P = u[static_cast<std::size_t>(j)] - u[static_cast<std::size_t>(pf)] -
                       u[static_cast<std::size_t>(pg)] + ux;
      if (P < -tol) set.push_back(e);
    }
    family.set(i, std::move(set));
  }
  // Ancestor closure guards Stability against borderline P evaluations on
  // inexact input; a no-op for exactly convex u.
  StencilFamily closed = family;
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    for (const Vec2i& e : family.at(i))
      if (norm2(e) > 1)
        for (Vec2i anc : ancestors(e))
          if (grid.contains(x + anc)) closed.insert(i, anc);
  }
  return closed;
}

// Minimal family of stencils containing the given per-point edge offsets:
// V(x) = V_max(x) ∩ union of Anc(e) over edges e at x.
inline StencilFamily stencils_from_edge_offsets(const GridDomain& grid,
                                                const std::vector<std::vector<Vec2i>>& edges) {
  if (edges.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("stencils_from_edge_offsets: size mismatch");
  StencilFamily family(grid);
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    std::vector<Vec2i> set;
    for (const Vec2i& e : edges[static_cast<std::size_t>(i)])
      for (Vec2i anc : ancestors(e))
        if (grid.contains(x + anc)) set.push_back(anc);
    family.set(i, std::move(set));
  }
  return family;
}

}  // namespace gridconv
