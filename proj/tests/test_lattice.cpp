#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gridconv/lattice.hpp"

using namespace gridconv;

namespace {

// Exhaustive search for direct acute bases summing to e.
std::vector<Basis> brute_force_parents(Vec2i e) {
  std::vector<Basis> found;
  const Int R = static_cast<Int>(std::ceil(std::sqrt(static_cast<double>(norm2(e))))) + 1;
  for (Int fa = -R; fa <= R; ++fa)
    for (Int fb = -R; fb <= R; ++fb) {
      Vec2i f{fa, fb}, g = e - f;
      if (det(f, g) == 1 && dot(f, g) >= 0) found.push_back({f, g});
    }
  return found;
}

std::set<Vec2i, Vec2iLess> as_set(const std::vector<Vec2i>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("irreducibility") {
  CHECK(is_irreducible({1, 0}));
  CHECK_FALSE(is_irreducible({2, 4}));
  CHECK(is_irreducible({3, 5}));  // Euclid: gcd(3,5) = gcd(3,2) = gcd(1,2) = 1
  CHECK(is_irreducible({-3, 5}));
  CHECK_FALSE(is_irreducible({-2, -2}));
  CHECK_THROWS_AS(is_irreducible({0, 0}), std::invalid_argument);
}

TEST_CASE("parents of small vectors") {
  CHECK(parents({1, 1}).f == Vec2i{1, 0});
  CHECK(parents({1, 1}).g == Vec2i{0, 1});
  CHECK(parents({1, 2}).f == Vec2i{1, 1});
  CHECK(parents({1, 2}).g == Vec2i{0, 1});
  CHECK(parents({2, 3}).f == Vec2i{1, 1});
  CHECK(parents({2, 3}).g == Vec2i{1, 2});
  CHECK_THROWS_WITH(parents({1, 0}), "Unit vectors have no parents.");
  CHECK_THROWS_AS(parents({0, -1}), std::invalid_argument);
  CHECK_THROWS_AS(parents({2, 4}), std::invalid_argument);
}

TEST_CASE("parents are the unique direct acute basis, R = 50") {
  const Int R = 50;
  int checked = 0;
  for (Int a = -R; a <= R; ++a)
    for (Int b = -R; b <= R; ++b) {
      Vec2i e{a, b};
      if (e == Vec2i{0, 0} || norm2(e) > R * R || norm2(e) <= 1) continue;
      if (!is_irreducible(e)) continue;
      auto all = brute_force_parents(e);
      REQUIRE(all.size() == 1);
      Basis fg = parents(e);
      CHECK(fg.f == all[0].f);
      CHECK(fg.g == all[0].g);
      CHECK(fg.f + fg.g == e);
      CHECK(fg.direct());
      CHECK(fg.acute());
      ++checked;
    }
  CHECK(checked > 4000);
}

TEST_CASE("children examples") {
  CHECK(children({1, 1}, 2.5) == std::vector<Vec2i>{{2, 1}, {1, 2}});
  CHECK(children({1, 2}, 3.7) == std::vector<Vec2i>{{2, 3}, {1, 3}});
  CHECK(children({1, 1}, 1.0).empty());
}

TEST_CASE("children and parents invert each other") {
  const double R = 20.0;
  for (Int a = -20; a <= 20; ++a)
    for (Int b = -20; b <= 20; ++b) {
      Vec2i e{a, b};
      if (e == Vec2i{0, 0} || !is_irreducible(e)) continue;
      for (Vec2i child : children(e, R)) {
        CHECK(is_irreducible(child));
        Basis fg = parents(child);
        CHECK((fg.f == e || fg.g == e));
      }
    }
  // Completeness: every non-unit irreducible vector appears among the
  // children of each of its parents.
  for (Int a = -15; a <= 15; ++a)
    for (Int b = -15; b <= 15; ++b) {
      Vec2i e{a, b};
      if (e == Vec2i{0, 0} || norm2(e) <= 1 || !is_irreducible(e)) continue;
      Basis fg = parents(e);
      for (Vec2i p : {fg.f, fg.g}) {
        auto kids = children(p, std::sqrt(static_cast<double>(norm2(e))) + 1e-9);
        CHECK(std::find(kids.begin(), kids.end(), e) != kids.end());
      }
    }
}

TEST_CASE("ancestors") {
  CHECK(as_set(ancestors({1, 0})) == std::set<Vec2i, Vec2iLess>{{1, 0}});
  CHECK(as_set(ancestors({1, 2})) == std::set<Vec2i, Vec2iLess>{{1, 2}, {1, 1}, {0, 1}, {1, 0}});
  auto anc23 = as_set(ancestors({2, 3}));
  CHECK(anc23 == std::set<Vec2i, Vec2iLess>{{2, 3}, {1, 2}, {1, 1}, {1, 0}, {0, 1}});
  CHECK(anc23.size() == 5);  // == ||e||_inf + 2

  for (Int a = -50; a <= 50; ++a)
    for (Int b = -50; b <= 50; ++b) {
      Vec2i e{a, b};
      if (e == Vec2i{0, 0} || norm2(e) > 2500 || !is_irreducible(e)) continue;
      CHECK(static_cast<Int>(ancestors(e).size()) <= norm_inf(e) + 2);
    }
}

TEST_CASE("cyclic trigonometric order") {
  CHECK(cyclic_between({1, 0}, {1, 1}, {0, 1}));
  CHECK_FALSE(cyclic_between({1, 0}, {0, 1}, {1, 1}));
  CHECK(cyclic_between({0, 1}, {-1, -1}, {1, 0}));  // 90 < 225 < 360 degrees
  CHECK_THROWS_AS(cyclic_between({0, 0}, {1, 0}, {0, 1}), std::invalid_argument);

  // Against a floating-point angle oracle, away from ties.
  auto angle_of = [](Vec2i v) {
    double t = std::atan2(static_cast<double>(v.b), static_cast<double>(v.a));
    return t < 0 ? t + 2 * M_PI : t;
  };
  std::vector<Vec2i> dirs;
  for (Int a = -4; a <= 4; ++a)
    for (Int b = -4; b <= 4; ++b)
      if (!(a == 0 && b == 0)) dirs.push_back({a, b});
  for (Vec2i f : dirs)
    for (Vec2i e : dirs)
      for (Vec2i g : dirs) {
        double tf = angle_of(f), te = angle_of(e), tg = angle_of(g);
        double d1 = std::fmod(te - tf + 2 * M_PI, 2 * M_PI);
        double d2 = std::fmod(tg - tf + 2 * M_PI, 2 * M_PI);
        if (d1 < 1e-12 || d2 < 1e-12 || std::abs(d1 - d2) < 1e-12) continue;  // shared direction
        CHECK(cyclic_between(f, e, g) == (d1 < d2));
      }
}

TEST_CASE("irreducible density approaches 6/pi^2") {
  const long long n = 1000;
  long long coprime = 0;
  for (long long i = 1; i <= n; ++i)
    for (long long j = 1; j <= n; ++j)
      if (std::gcd(i, j) == 1) ++coprime;
  double density = static_cast<double>(coprime) / static_cast<double>(n * n);
  double limit = 6.0 / (M_PI * M_PI);
  CHECK(std::abs(density - limit) / limit < 0.02);
}
