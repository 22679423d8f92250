#pragma once

// Integer arithmetic on irreducible lattice vectors: parents/children in the
// Stern-Brocot sense, ancestor sets, and exact cyclic order predicates.

#include <array>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridconv {

using Int = std::int64_t;

// Lattice coordinates are asserted to stay well below 2^20 so that every
// determinant/dot product below fits comfortably in 64 bits.
inline constexpr Int kCoordLimit = Int{1} << 20;

struct Vec2i {
  Int a = 0;
  Int b = 0;

  friend constexpr bool operator==(const Vec2i&, const Vec2i&) = default;
  constexpr Vec2i operator+(Vec2i o) const { return {a + o.a, b + o.b}; }
  constexpr Vec2i operator-(Vec2i o) const { return {a - o.a, b - o.b}; }
  constexpr Vec2i operator-() const { return {-a, -b}; }
  constexpr Vec2i operator*(Int k) const { return {a * k, b * k}; }
};

struct Vec2iHash {
  std::size_t operator()(const Vec2i& v) const {
    auto h = static_cast<std::uint64_t>(v.a) * 0x9e3779b97f4a7c15ull;
    h ^= static_cast<std::uint64_t>(v.b) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct Vec2iLess {
  constexpr bool operator()(const Vec2i& x, const Vec2i& y) const {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  }
};

inline void check_coord_range(Vec2i v) {
  if (v.a <= -kCoordLimit || v.a >= kCoordLimit || v.b <= -kCoordLimit || v.b >= kCoordLimit)
    throw std::invalid_argument("lattice coordinate out of supported range");
}

constexpr Int det(Vec2i f, Vec2i g) { return f.a * g.b - f.b * g.a; }
constexpr Int dot(Vec2i f, Vec2i g) { return f.a * g.a + f.b * g.b; }
constexpr Int norm2(Vec2i v) { return dot(v, v); }
constexpr Int norm_inf(Vec2i v) {
  Int x = v.a < 0 ? -v.a : v.a;
  Int y = v.b < 0 ? -v.b : v.b;
  return x > y ? x : y;
}
constexpr bool is_unit(Vec2i v) { return norm2(v) == 1; }

inline bool is_irreducible(Vec2i e) {
  if (e == Vec2i{0, 0}) throw std::invalid_argument("is_irreducible: zero vector");
  check_coord_range(e);
  return std::gcd(e.a < 0 ? -e.a : e.a, e.b < 0 ? -e.b : e.b) == 1;
}

// Direct basis: det(f,g) = 1; acute: <f,g> >= 0.
struct Basis {
  Vec2i f;
  Vec2i g;

  bool direct() const { return det(f, g) == 1; }
  bool acute() const { return dot(f, g) >= 0; }
};

// The unique direct acute basis (f,g) with f+g = e. Solves det(e,g)=1 by the
// extended Euclidean algorithm, then picks the single shift g+te making the
// pair acute (the concave quadratic <f-te, g+te> is >= 0 at exactly one
// integer t).
inline Basis parents(Vec2i e) {
  check_coord_range(e);
  if (norm2(e) <= 1) throw std::invalid_argument("Unit vectors have no parents.");
  if (!is_irreducible(e)) throw std::invalid_argument("parents: vector not irreducible");

  // Particular solution of e.a * y - e.b * x = 1 via extended gcd.
  Int old_r = e.a, r = e.b;
  Int old_s = 1, s = 0;
  Int old_t = 0, t = 1;
  while (r != 0) {
    Int q = old_r / r;
    Int tmp = old_r - q * r; old_r = r; r = tmp;
    tmp = old_s - q * s; old_s = s; s = tmp;
    tmp = old_t - q * t; old_t = t; t = tmp;
  }
  // old_s * e.a + old_t * e.b = old_r = +-gcd = +-1.
  Int sign = old_r > 0 ? 1 : -1;
  Vec2i g{-old_t * sign, old_s * sign};  // det(e, g) = 1
  Vec2i f = e - g;                       // det(f, g) = det(e, g) = 1

  // phi(k) = <f - k e, g + k e> is a concave parabola; locate its integer apex.
  const Int A = norm2(e);
  const Int B = dot(f, e) - dot(g, e);
  // phi(k) = phi(0) + B k - A k^2; maximize near k* = B / (2A).
  Int k0 = B >= 0 ? B / (2 * A) : -((-B + 2 * A - 1) / (2 * A));
  for (Int k = k0 - 1; k <= k0 + 2; ++k) {
    Vec2i fk = f - e * k, gk = g + e * k;
    if (dot(fk, gk) >= 0) return Basis{fk, gk};
  }
  throw std::logic_error("parents: no acute representative found");
}

// Parents of e when ||e||>1; the two orthogonal unit vectors with
// det(f,e)=det(e,g)=1 when e is a unit vector. This is the convention used
// when enumerating children of unit vectors.
inline Basis parents_or_orthogonal(Vec2i e) {
  if (norm2(e) > 1) return parents(e);
  return Basis{{e.b, -e.a}, {-e.b, e.a}};
}

// All e' with parent e and norm2(e') <= bound2, i.e. {f + k e, k e + g : k>=1}.
// Ordered by k, f-branch before g-branch.
inline std::vector<Vec2i> children(Vec2i e, double norm_bound) {
  if (!is_irreducible(e)) throw std::invalid_argument("children: vector not irreducible");
  const double bound2 = norm_bound * norm_bound;
  Basis fg = parents_or_orthogonal(e);
  std::vector<Vec2i> out;
  for (Int k = 1;; ++k) {
    Vec2i cf = fg.f + e * k;
    Vec2i cg = e * k + fg.g;
    bool any = false;
    if (static_cast<double>(norm2(cf)) <= bound2) { out.push_back(cf); any = true; }
    if (static_cast<double>(norm2(cg)) <= bound2) { out.push_back(cg); any = true; }
    if (!any) break;  // norms are increasing in k on both branches
  }
  return out;
}

// Anc(e): the smallest set containing e and the parents of any member of
// norm > 1. Satisfies #Anc(e) <= ||e||_inf + 2.
inline std::vector<Vec2i> ancestors(Vec2i e) {
  if (!is_irreducible(e)) throw std::invalid_argument("ancestors: vector not irreducible");
  std::vector<Vec2i> out;
  std::vector<Vec2i> stack{e};
  auto seen = [&out](Vec2i v) {
    for (const Vec2i& w : out)
      if (w == v) return true;
    return false;
  };
  while (!stack.empty()) {
    Vec2i v = stack.back();
    stack.pop_back();
    if (seen(v)) continue;
    out.push_back(v);
    if (norm2(v) > 1) {
      Basis fg = parents(v);
      stack.push_back(fg.f);
      stack.push_back(fg.g);
    }
  }
  return out;
}

// Dense cache of irreducibility and parents over a rectangle of offsets.
// Enumerations of maximal stencils touch O(N^2) offsets; the table turns each
// query into an array load.
class OffsetTable {
 public:
  OffsetTable(Vec2i lo, Vec2i hi) : lo_(lo), hi_(hi) {
    width_ = hi.b - lo.b + 1;
    entries_.resize(static_cast<std::size_t>((hi.a - lo.a + 1) * width_));
    for (Int a = lo.a; a <= hi.a; ++a)
      for (Int b = lo.b; b <= hi.b; ++b) {
        Vec2i e{a, b};
        Entry& ent = entries_[slot(e)];
        if (e == Vec2i{0, 0}) continue;
        ent.irreducible = is_irreducible(e);
        if (ent.irreducible && norm2(e) > 1) {
          Basis fg = parents(e);
          ent.f = fg.f;
          ent.g = fg.g;
        }
      }
  }

  struct Entry {
    bool irreducible = false;
    Vec2i f{0, 0}, g{0, 0};  // parents when irreducible and norm > 1
  };

  const Entry& at(Vec2i e) const { return entries_[slot(e)]; }

 private:
  std::size_t slot(Vec2i e) const {
    return static_cast<std::size_t>((e.a - lo_.a) * width_ + (e.b - lo_.b));
  }

  Vec2i lo_, hi_;
  Int width_ = 0;
  std::vector<Entry> entries_;
};

namespace angle {

// Half-plane index: 0 for angles in [0,pi), 1 for [pi,2pi).
inline int half(Vec2i v) { return (v.b > 0 || (v.b == 0 && v.a > 0)) ? 0 : 1; }

// Strict comparison of directions by angle in [0, 2pi). Equal directions
// compare false both ways.
inline bool angle_less(Vec2i x, Vec2i y) {
  int hx = half(x), hy = half(y);
  if (hx != hy) return hx < hy;
  return det(x, y) > 0;
}

inline bool same_direction(Vec2i x, Vec2i y) {
  return det(x, y) == 0 && dot(x, y) > 0;
}

}  // namespace angle

// True iff f < e < g in the cyclic strict trigonometric order (all three
// directions distinct; exact integer sign tests only).
inline bool cyclic_between(Vec2i f, Vec2i e, Vec2i g) {
  for (Vec2i v : {f, e, g})
    if (v == Vec2i{0, 0}) throw std::invalid_argument("cyclic_between: zero vector");
  if (angle::same_direction(f, e) || angle::same_direction(e, g) || angle::same_direction(f, g))
    return false;
  // Position of x on the circle measured CCW from f, as (half-turn index, tie-break).
  auto ccw_less_from_f = [&](Vec2i x, Vec2i y) {
    auto cls = [&](Vec2i v) -> int {
      Int d = det(f, v);
      if (d > 0) return 0;                    // in (0, pi)
      if (d == 0) return dot(f, v) > 0 ? -1 : 1;  // same dir (excluded) / opposite
      return 2;                               // in (pi, 2pi)
    };
    int cx = cls(x), cy = cls(y);
    if (cx != cy) return cx < cy;
    return det(x, y) > 0;
  };
  return ccw_less_from_f(e, g);
}

}  // namespace gridconv
