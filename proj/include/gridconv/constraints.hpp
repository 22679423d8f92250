#pragma once

// Constraint systems for the cones Conv(X), Conv(V), Conv'(V), DConv(X),
// DConv(V): assembly into explicit row lists, streaming evaluation (defects,
// membership, row counting) that never materializes the quadratic-size full
// systems, and sparse-file export.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridconv/forms.hpp"
#include "gridconv/grid.hpp"
#include "gridconv/stencils.hpp"

namespace gridconv {

enum class ConeKind { FullConv, ConvV, ConvPrimeV, DConvX, DConvV, DConvPrimeV };

inline const char* to_string(ConeKind k) {
  switch (k) {
    case ConeKind::FullConv: return "FullConv";
    case ConeKind::ConvV: return "ConvV";
    case ConeKind::ConvPrimeV: return "ConvPrimeV";
    case ConeKind::DConvX: return "DConvX";
    case ConeKind::DConvV: return "DConvV";
    case ConeKind::DConvPrimeV: return "DConvPrimeV";
  }
  return "?";
}

struct ConeSpec {
  ConeKind kind = ConeKind::FullConv;
  const StencilFamily* stencils = nullptr;  // required for the V-based cones
  double rho = 1.0;                         // candidate extension factor

  static ConeSpec full() { return {ConeKind::FullConv, nullptr, 1.0}; }
  static ConeSpec dconv_full() { return {ConeKind::DConvX, nullptr, 1.0}; }
  static ConeSpec conv(const StencilFamily& V, double rho = 1.0) { return {ConeKind::ConvV, &V, rho}; }
  static ConeSpec conv_prime(const StencilFamily& V) { return {ConeKind::ConvPrimeV, &V, 1.0}; }
  static ConeSpec dconv(const StencilFamily& V, double rho = 1.0) { return {ConeKind::DConvV, &V, rho}; }
  static ConeSpec dconv_prime(const StencilFamily& V) { return {ConeKind::DConvPrimeV, &V, 1.0}; }
};

namespace detail {

// Emits every row of the cone's defining system exactly once, as
// fn(kind, x, e, base_index). Support is already verified. S rows keep the
// representative with lexicographically positive offset.
template <typename F>
void for_each_row(const GridDomain& grid, const ConeSpec& cone, F&& fn) {
  const bool needs_V = cone.kind == ConeKind::ConvV || cone.kind == ConeKind::ConvPrimeV ||
                       cone.kind == ConeKind::DConvV || cone.kind == ConeKind::DConvPrimeV;
  if (needs_V) {
    if (cone.stencils == nullptr) throw std::invalid_argument("cone requires a stencil family");
    if (&cone.stencils->grid() != &grid) throw std::invalid_argument("cone stencils built on another grid");
    const StencilFamily& V = *cone.stencils;
    const bool with_T = cone.kind == ConeKind::ConvV || cone.kind == ConeKind::ConvPrimeV;
    for (PointIndex i = 0; i < grid.size(); ++i) {
      Vec2i x = grid.point(i);
      for (const Vec2i& e : V.at(i)) {
        if (grid.contains(x - e) && (lex_positive(e) || !V.contains(i, -e)))
          fn(FormKind::S, x, lex_positive(e) ? e : -e, i);
        if (with_T && norm2(e) > 1) {
          Basis fg = parents(e);
          if (grid.contains(x - fg.f) && grid.contains(x - fg.g)) fn(FormKind::T, x, e, i);
        }
      }
      if (cone.kind == ConeKind::ConvV) {
        for (const Vec2i& e : extended_candidates(V, i, cone.rho)) fn(FormKind::P, x, e, i);
      } else if (cone.kind == ConeKind::DConvV) {
        std::vector<Vec2i> seen;
        for (const Vec2i& e : extended_candidates(V, i, cone.rho)) {
          Vec2i rep = lex_positive(e) ? e : -e;
          if (std::find(seen.begin(), seen.end(), rep) != seen.end()) continue;
          seen.push_back(rep);
          Basis fg = parents(rep);
          bool ok = true;
          for (Vec2i s : {x - rep, x + fg.f, x - fg.f, x + fg.g, x - fg.g})
            ok = ok && grid.contains(s);
          if (ok && grid.contains(x + rep)) fn(FormKind::H, x, rep, i);
        }
      }
    }
    return;
  }
  // Full cones: stream over V_max via the offset table.
  const OffsetTable table = make_offset_table(grid);
  const bool with_T = cone.kind == ConeKind::FullConv;
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    for (PointIndex j = 0; j < grid.size(); ++j) {
      if (j == i) continue;
      Vec2i e = grid.point(j) - x;
      const auto& ent = table.at(e);
      if (!ent.irreducible) continue;
      if (lex_positive(e) && grid.contains(x - e)) fn(FormKind::S, x, e, i);
      if (with_T && norm2(e) > 1 && grid.contains(x - ent.f) && grid.contains(x - ent.g))
        fn(FormKind::T, x, e, i);
    }
  }
}

inline LinearForm build_form(FormKind kind, Vec2i x, Vec2i e) {
  switch (kind) {
    case FormKind::S: return form_S(x, e);
    case FormKind::T: return form_T(x, e);
    case FormKind::P: return form_P(x, e);
    case FormKind::H: return form_H(x, e);
  }
  throw std::logic_error("build_form: bad kind");
}

}  // namespace detail

struct ConstraintSystem {
  const GridDomain* grid = nullptr;
  ConeSpec cone;
  std::vector<LinearForm> rows;

  std::size_t size() const { return rows.size(); }

  double row_value(std::size_t r, std::span<const double> u) const {
    return rows[r].value(*grid, u);
  }

  // Least row value; membership at tolerance t means min_value >= -t.
  double min_value(std::span<const double> u) const {
    double m = std::numeric_limits<double>::infinity();
    for (const LinearForm& row : rows) m = std::min(m, row.value(*grid, u));
    return m;
  }
};

inline ConstraintSystem assemble(const GridDomain& grid, const ConeSpec& cone) {
  ConstraintSystem sys;
  sys.grid = &grid;
  sys.cone = cone;
  detail::for_each_row(grid, cone, [&](FormKind kind, Vec2i x, Vec2i e, PointIndex) {
    sys.rows.push_back(detail::build_form(kind, x, e));
  });
  return sys;
}

inline long long count_rows(const GridDomain& grid, const ConeSpec& cone) {
  long long n = 0;
  detail::for_each_row(grid, cone, [&](FormKind, Vec2i, Vec2i, PointIndex) { ++n; });
  return n;
}

// Smallest eps >= 0 with u + eps*q in Conv(X) (full mode: S and T rows) or in
// DConv(X) (directional mode: S rows only); q is the grid-unit quadratic, so
// every row satisfies L(q) > 0 and eps = max(0, max -L(u)/L(q)).
enum class DefectMode { Full, Directional };

inline double convexity_defect(const GridDomain& grid, std::span<const double> u,
                               DefectMode mode = DefectMode::Full) {
  if (u.size() != static_cast<std::size_t>(grid.size()))
    throw std::invalid_argument("convexity_defect: size mismatch");
  const OffsetTable table = make_offset_table(grid);
  const bool with_T = mode == DefectMode::Full;
  double worst = 0.0;
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i x = grid.point(i);
    const double ux = u[static_cast<std::size_t>(i)];
    for (PointIndex j = 0; j < grid.size(); ++j) {
      if (j == i) continue;
      Vec2i e = grid.point(j) - x;
      const auto& ent = table.at(e);
      if (!ent.irreducible) continue;
      const double ue = u[static_cast<std::size_t>(j)];
      if (lex_positive(e)) {
        PointIndex m = grid.find(x - e);
        if (m >= 0) {
          const double S = ue - 2 * ux + u[static_cast<std::size_t>(m)];
          worst = std::max(worst, -S / static_cast<double>(norm2(e)));
        }
      }
      if (with_T && norm2(e) > 1) {
        PointIndex mf = grid.find(x - ent.f), mg = grid.find(x - ent.g);
        if (mf >= 0 && mg >= 0) {
          const double T = ue + u[static_cast<std::size_t>(mf)] + u[static_cast<std::size_t>(mg)] - 3 * ux;
          const double Tq = 0.5 * static_cast<double>(norm2(e) + norm2(ent.f) + norm2(ent.g));
          worst = std::max(worst, -T / Tq);
        }
      }
    }
  }
  return worst;
}

// Least row value over the cone's system, streamed.
inline double min_row_value(const GridDomain& grid, std::span<const double> u, const ConeSpec& cone) {
  double m = std::numeric_limits<double>::infinity();
  detail::for_each_row(grid, cone, [&](FormKind kind, Vec2i x, Vec2i e, PointIndex) {
    m = std::min(m, detail::build_form(kind, x, e).value(grid, u));
  });
  return m;
}

inline bool is_member(const GridDomain& grid, std::span<const double> u, const ConeSpec& cone,
                      double tol) {
  if (tol < 0) throw std::invalid_argument("is_member: tol must be >= 0");
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  return min_row_value(grid, u, cone) >= -tol * scale;
}

// Matrix-Market coordinate export (rows = forms, columns = grid points).
inline void export_matrix_market(const ConstraintSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  long long nnz = 0;
  for (const LinearForm& row : sys.rows) nnz += row.size;
  out << "%%MatrixMarket matrix coordinate integer general\n";
  out << "% cone=" << to_string(sys.cone.kind) << "\n";
  out << sys.rows.size() << " " << sys.grid->size() << " " << nnz << "\n";
  for (std::size_t r = 0; r < sys.rows.size(); ++r) {
    const LinearForm& row = sys.rows[r];
    for (int k = 0; k < row.size; ++k)
      out << (r + 1) << " " << (sys.grid->index_of(row.site[static_cast<std::size_t>(k)]) + 1) << " "
          << static_cast<int>(row.weight[static_cast<std::size_t>(k)]) << "\n";
  }
}

// JSON row list for debugging; one object per row.
inline void export_rows_json(const ConstraintSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "[\n";
  for (std::size_t r = 0; r < sys.rows.size(); ++r) {
    const LinearForm& row = sys.rows[r];
    out << "  {\"kind\":\"" << to_string(row.kind) << "\",\"x\":[" << row.x.a << "," << row.x.b
        << "],\"e\":[" << row.e.a << "," << row.e.b << "],\"terms\":[";
    for (int k = 0; k < row.size; ++k) {
      if (k) out << ",";
      out << "[" << sys.grid->index_of(row.site[static_cast<std::size_t>(k)]) << ","
          << static_cast<int>(row.weight[static_cast<std::size_t>(k)]) << "]";
    }
    out << "]}" << (r + 1 < sys.rows.size() ? "," : "") << "\n";
  }
  out << "]\n";
}

}  // namespace gridconv
