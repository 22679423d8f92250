#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gridconv/hull_oracle.hpp"
#include "gridconv/refine.hpp"
#include "gridconv/rng.hpp"

using namespace gridconv;

namespace {

GridDomain lattice_square(Int r) {
  std::vector<Vec2i> pts;
  for (Int a = -r; a <= r; ++a)
    for (Int b = -r; b <= r; ++b) pts.push_back({a, b});
  return GridDomain::from_points(pts);
}

std::vector<double> random_values(const GridDomain& g, const CounterRng& rng, std::uint64_t stream) {
  std::vector<double> u(static_cast<std::size_t>(g.size()));
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = static_cast<double>(rng.uniform_int(stream * 4096 + i, -5, 5));
  return u;
}

std::span<const double> primal_span(const Solution& sol) {
  return {sol.primal.data(), static_cast<std::size_t>(sol.primal.size())};
}

}  // namespace

TEST_CASE("projecting q terminates immediately") {
  auto g = lattice_square(2);
  auto q = q_values(g);
  auto energy = projection_energy(g, q);

  for (ConeFamily family : {ConeFamily::Conv, ConeFamily::DConv}) {
    RefineOptions opts;
    opts.family = family;
    auto run = run_supercones(energy, g, opts);
    CHECK(run.converged);
    CHECK(run.iterations.size() == 1);
    CHECK(run.iterations[0].additions == 0);
    for (PointIndex i = 0; i < g.size(); ++i)
      CHECK(run.solution.primal(i) == Catch::Approx(q[static_cast<std::size_t>(i)]).margin(1e-7));
  }
}

TEST_CASE("both refinement loops match the direct full-cone projection") {
  auto g = lattice_square(2);
  CounterRng rng(512);
  for (std::uint64_t t = 0; t < 4; ++t) {
    auto target = random_values(g, rng, t);
    auto energy = projection_energy(g, target);

    auto direct = solve_direct(energy, g, ConeFamily::Conv);
    REQUIRE(direct.status == SolveStatus::Optimal);

    for (double rho : {1.0, 1.5}) {
      RefineOptions opts;
      opts.rho = rho;
      auto sup = run_supercones(energy, g, opts);
      auto sub = run_subcones(energy, g, opts);
      CHECK(sup.converged);
      CHECK(sub.converged);
      const double scale = 1.0 + std::abs(direct.objective);
      CHECK(std::abs(sup.solution.objective - direct.objective) < 1e-6 * scale);
      CHECK(std::abs(sub.solution.objective - direct.objective) < 1e-6 * scale);

      // Termination certificate: the minimizer is discretely convex, and the
      // independent hull oracle agrees.
      CHECK(convexity_defect(g, primal_span(sup.solution)) <
            1e-6 * detail::value_scale(sup.solution.primal));
      CHECK(is_extensible(g, primal_span(sup.solution), 1e-6));
    }
  }
}

TEST_CASE("directional family agrees with the direct directional projection") {
  auto g = lattice_square(2);
  CounterRng rng(513);
  for (std::uint64_t t = 0; t < 3; ++t) {
    auto target = random_values(g, rng, t);
    auto energy = projection_energy(g, target);
    auto direct = solve_direct(energy, g, ConeFamily::DConv);
    REQUIRE(direct.status == SolveStatus::Optimal);

    RefineOptions opts;
    opts.family = ConeFamily::DConv;
    auto sup = run_supercones(energy, g, opts);
    auto sub = run_subcones(energy, g, opts);
    CHECK(sup.converged);
    CHECK(sub.converged);
    const double scale = 1.0 + std::abs(direct.objective);
    CHECK(std::abs(sup.solution.objective - direct.objective) < 1e-6 * scale);
    CHECK(std::abs(sub.solution.objective - direct.objective) < 1e-6 * scale);
    CHECK(convexity_defect(g, primal_span(sup.solution), DefectMode::Directional) <
          1e-6 * detail::value_scale(sup.solution.primal));
  }
}

TEST_CASE("iteration traces are monotone") {
  auto g = lattice_square(2);
  CounterRng rng(514);
  auto target = random_values(g, rng, 0);
  auto energy = projection_energy(g, target);

  auto sub = run_subcones(energy, g, {});
  for (std::size_t i = 1; i < sub.iterations.size(); ++i) {
    CHECK(sub.iterations[i].stencil_count > sub.iterations[i - 1].stencil_count);
    CHECK(sub.iterations[i].objective <=
          sub.iterations[i - 1].objective + 1e-7 * (1 + std::abs(sub.iterations[i].objective)));
  }

  auto sup = run_supercones(energy, g, {});
  for (std::size_t i = 1; i < sup.iterations.size(); ++i) {
    CHECK(sup.iterations[i].stencil_count > sup.iterations[i - 1].stencil_count);
    CHECK(sup.iterations[i].objective >=
          sup.iterations[i - 1].objective - 1e-7 * (1 + std::abs(sup.iterations[i].objective)));
  }
}

TEST_CASE("final stencils carry the minimal stencils of the minimizer") {
  auto g = lattice_square(2);
  CounterRng rng(515);
  auto target = random_values(g, rng, 9);
  auto energy = projection_energy(g, target);
  auto run = run_supercones(energy, g, {});
  REQUIRE(run.converged);
  auto Vu = minimal_stencils_for(g, primal_span(run.solution), 1e-6);
  for (PointIndex i = 0; i < g.size(); ++i)
    for (const Vec2i& e : Vu.at(i)) CHECK(run.stencils.contains(i, e));
}

TEST_CASE("refined envelope equals the hull-oracle envelope") {
  auto g = lattice_square(2);
  CounterRng rng(516);
  for (std::uint64_t t = 0; t < 5; ++t) {
    auto u = random_values(g, rng, t);
    auto fast = envelope_via_refinement(g, u);
    auto oracle = convex_envelope(g, u);
    for (std::size_t i = 0; i < u.size(); ++i)
      CHECK(fast[i] == Catch::Approx(oracle[i]).margin(1e-6));
  }
}
