#pragma once

// The linear forms S/T/P/H acting on grid functions. A form is a weighted sum
// of Dirac masses at lattice sites; it is defined on F(X) when every site
// lies in X.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gridconv/grid.hpp"
#include "gridconv/lattice.hpp"

namespace gridconv {

enum class FormKind : std::uint8_t { S, T, P, H };

inline const char* to_string(FormKind k) {
  switch (k) {
    case FormKind::S: return "S";
    case FormKind::T: return "T";
    case FormKind::P: return "P";
    case FormKind::H: return "H";
  }
  return "?";
}

struct LinearForm {
  FormKind kind = FormKind::S;
  Vec2i x{0, 0};  // base point
  Vec2i e{0, 0};  // offset
  int size = 0;
  std::array<Vec2i, 7> site{};
  std::array<std::int8_t, 7> weight{};

  bool supported(const GridDomain& grid) const {
    for (int i = 0; i < size; ++i)
      if (!grid.contains(site[static_cast<std::size_t>(i)])) return false;
    return true;
  }

  // Requires support; u indexed like grid.points().
  double value(const GridDomain& grid, std::span<const double> u) const {
    double s = 0;
    for (int i = 0; i < size; ++i)
      s += weight[static_cast<std::size_t>(i)] *
           u[static_cast<std::size_t>(grid.index_of(site[static_cast<std::size_t>(i)]))];
    return s;
  }

  // Value on the grid-unit quadratic q; positive for S and T forms.
  double value_on_q() const {
    double s = 0;
    for (int i = 0; i < size; ++i)
      s += weight[static_cast<std::size_t>(i)] * q_lattice(site[static_cast<std::size_t>(i)]);
    return s;
  }

 private:
  friend LinearForm form_S(Vec2i, Vec2i);
  friend LinearForm form_T(Vec2i, Vec2i);
  friend LinearForm form_P(Vec2i, Vec2i);
  friend LinearForm form_H(Vec2i, Vec2i);

  void push(Vec2i s, int w) {
    for (int i = 0; i < size; ++i)
      if (site[static_cast<std::size_t>(i)] == s) {
        weight[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(weight[static_cast<std::size_t>(i)] + w);
        return;
      }
    site[static_cast<std::size_t>(size)] = s;
    weight[static_cast<std::size_t>(size)] = static_cast<std::int8_t>(w);
    ++size;
  }
};

// S_x^e(u) = u(x+e) - 2 u(x) + u(x-e).
inline LinearForm form_S(Vec2i x, Vec2i e) {
  if (!is_irreducible(e)) throw std::invalid_argument("form_S: offset not irreducible");
  LinearForm L;
  L.kind = FormKind::S;
  L.x = x;
  L.e = e;
  L.push(x + e, 1);
  L.push(x, -2);
  L.push(x - e, 1);
  return L;
}

// T_x^e(u) = u(x+e) + u(x-f) + u(x-g) - 3 u(x), (f,g) the parents of e.
inline LinearForm form_T(Vec2i x, Vec2i e) {
  if (!is_irreducible(e) || norm2(e) <= 1)
    throw std::invalid_argument("form_T: offset must be irreducible with norm > 1");
  Basis fg = parents(e);
  LinearForm L;
  L.kind = FormKind::T;
  L.x = x;
  L.e = e;
  L.push(x + e, 1);
  L.push(x - fg.f, 1);
  L.push(x - fg.g, 1);
  L.push(x, -3);
  return L;
}

// P_x^e(u) = u(x+e) - u(x+f) - u(x+g) + u(x).
inline LinearForm form_P(Vec2i x, Vec2i e) {
  if (!is_irreducible(e) || norm2(e) <= 1)
    throw std::invalid_argument("form_P: offset must be irreducible with norm > 1");
  Basis fg = parents(e);
  LinearForm L;
  L.kind = FormKind::P;
  L.x = x;
  L.e = e;
  L.push(x + e, 1);
  L.push(x + fg.f, -1);
  L.push(x + fg.g, -1);
  L.push(x, 1);
  return L;
}

// H_x^e = P_x^e + P_x^{-e} (6 distinct satellites plus x with weight 2).
inline LinearForm form_H(Vec2i x, Vec2i e) {
  if (!is_irreducible(e) || norm2(e) <= 1)
    throw std::invalid_argument("form_H: offset must be irreducible with norm > 1");
  Basis fg = parents(e);
  LinearForm L;
  L.kind = FormKind::H;
  L.x = x;
  L.e = e;
  L.push(x + e, 1);
  L.push(x + fg.f, -1);
  L.push(x + fg.g, -1);
  L.push(x - e, 1);
  L.push(x - fg.f, -1);
  L.push(x - fg.g, -1);
  L.push(x, 2);
  return L;
}

inline bool is_supported(const GridDomain& grid, const LinearForm& form) {
  return form.supported(grid);
}

// Lexicographically positive representative of {e, -e}; used to deduplicate
// the identical forms S_x^e and S_x^{-e}.
inline bool lex_positive(Vec2i e) { return e.a > 0 || (e.a == 0 && e.b > 0); }

}  // namespace gridconv
