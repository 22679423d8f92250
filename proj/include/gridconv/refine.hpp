#pragma once

// Adaptive stencil refinement: the sub-cones loop (multiplier driven) and the
// super-cones loop (violation driven), both parameterized by the cone family
// (full or directional convexity) and the candidate extension factor rho.
// Also the large-instance convex envelope, computed as the pointwise-largest
// member of Conv(X) below a given function via the same machinery.

#include <chrono>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gridconv/constraints.hpp"
#include "gridconv/solver.hpp"
#include "gridconv/stencils.hpp"

namespace gridconv {

enum class ConeFamily { Conv, DConv };

// Objective, structural rows and bounds of a discretized energy; the
// convexity rows get appended per refinement iteration.
struct EnergyModel {
  int n = 0;
  std::vector<Eigen::Triplet<double>> quadratic;
  Eigen::VectorXd linear;
  std::vector<std::vector<std::pair<int, double>>> fixed_rows;  // includes constant column n
  std::vector<double> lower;

  explicit EnergyModel(int vars = 0)
      : n(vars), linear(Eigen::VectorXd::Zero(vars)),
        lower(static_cast<std::size_t>(vars), ConvexProgram::kNoBound) {}
};

struct RefineOptions {
  double rho = 1.5;
  ConeFamily family = ConeFamily::Conv;
  int max_outer = 50;
  double violation_tol = 1e-9;   // P_x^e(u) < -tol * scale adds e (super-cones)
  double multiplier_tol = 1e-7;  // lambda > tol * max dual adds e (sub-cones)
  SolveSettings solve;
};

struct IterationStat {
  long long stencil_count = 0;
  long long constraint_count = 0;
  double objective = 0;
  long long additions = 0;  // violated candidates (algorithm 2) or active rows (algorithm 1)
  double seconds = 0;
};

struct RefinementRun {
  std::vector<IterationStat> iterations;
  StencilFamily stencils;
  Solution solution;
  bool converged = false;
};

namespace detail {

inline ConvexProgram build_program(const EnergyModel& energy, const ConstraintSystem& sys) {
  const GridDomain& grid = *sys.grid;
  ConvexProgram prog(energy.n);
  prog.quadratic = energy.quadratic;
  prog.linear = energy.linear;
  prog.lower = energy.lower;
  for (const auto& row : energy.fixed_rows) prog.add_row(row);
  std::vector<std::pair<int, double>> terms;
  for (const LinearForm& row : sys.rows) {
    terms.clear();
    for (int k = 0; k < row.size; ++k)
      terms.emplace_back(grid.index_of(row.site[static_cast<std::size_t>(k)]),
                         static_cast<double>(row.weight[static_cast<std::size_t>(k)]));
    prog.add_row(terms);
  }
  return prog;
}

inline double value_scale(const Eigen::VectorXd& u) {
  return std::max(1.0, u.lpNorm<Eigen::Infinity>());
}

}  // namespace detail

// Super-cones loop: minimize over Conv'(V_i) (or DConv'(V_i)), then add every
// extended candidate whose parallelogram (or H) form goes negative on the
// minimizer. Terminates when no candidate is violated; the iterates then sit
// in Conv(X) (resp. DConv(X)) and the last one is the global minimizer.
inline RefinementRun run_supercones(const EnergyModel& energy, const GridDomain& grid,
                                    const RefineOptions& opts = {}) {
  if (energy.n != grid.size()) throw std::invalid_argument("run_supercones: size mismatch");
  RefinementRun run{{}, minimal_stencils(grid), {}, false};
  Eigen::VectorXd warm;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    auto t0 = std::chrono::steady_clock::now();
    ConeSpec cone = opts.family == ConeFamily::Conv ? ConeSpec::conv_prime(run.stencils)
                                                    : ConeSpec::dconv_prime(run.stencils);
    ConstraintSystem sys = assemble(grid, cone);
    ConvexProgram prog = detail::build_program(energy, sys);
    SolveSettings settings = opts.solve;
    if (warm.size() == energy.n) settings.warm_start = &warm;
    Solution sol = solve(prog, settings);
    if (sol.status == SolveStatus::Infeasible)
      throw std::runtime_error("run_supercones: sub-problem infeasible");
    warm = sol.primal;

    const double tol = opts.violation_tol * detail::value_scale(sol.primal);
    std::vector<std::pair<PointIndex, Vec2i>> additions;
    for (PointIndex i = 0; i < grid.size(); ++i) {
      Vec2i x = grid.point(i);
      for (const Vec2i& e : extended_candidates(run.stencils, i, opts.rho)) {
        double value;
        if (opts.family == ConeFamily::Conv) {
          value = form_P(x, e).value(grid, std::span<const double>(sol.primal.data(),
                                                                   static_cast<std::size_t>(energy.n)));
        } else {
          LinearForm H = form_H(x, e);
          if (!H.supported(grid)) continue;
          value = H.value(grid, std::span<const double>(sol.primal.data(),
                                                        static_cast<std::size_t>(energy.n)));
        }
        if (value < -tol) additions.emplace_back(i, e);
      }
    }

    IterationStat stat;
    stat.stencil_count = run.stencils.count();
    stat.constraint_count = static_cast<long long>(sys.size());
    stat.objective = sol.objective;
    stat.additions = static_cast<long long>(additions.size());
    stat.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.iterations.push_back(stat);
    run.solution = std::move(sol);

    if (additions.empty()) {
      run.converged = true;
      return run;
    }
    run.stencils = refine(run.stencils, additions);
  }
  return run;
}

// Sub-cones loop: minimize over Conv(V_i) (P rows on the extended candidates
// included as constraints), then add the candidates whose multipliers are
// active. Iterates are feasible throughout and the objective is
// non-increasing.
inline RefinementRun run_subcones(const EnergyModel& energy, const GridDomain& grid,
                                  const RefineOptions& opts = {}) {
  if (energy.n != grid.size()) throw std::invalid_argument("run_subcones: size mismatch");
  RefinementRun run{{}, minimal_stencils(grid), {}, false};
  Eigen::VectorXd warm;
  const std::size_t fixed = energy.fixed_rows.size();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    auto t0 = std::chrono::steady_clock::now();
    ConeSpec cone = opts.family == ConeFamily::Conv ? ConeSpec::conv(run.stencils, opts.rho)
                                                    : ConeSpec::dconv(run.stencils, opts.rho);
    ConstraintSystem sys = assemble(grid, cone);
    ConvexProgram prog = detail::build_program(energy, sys);
    SolveSettings settings = opts.solve;
    if (warm.size() == energy.n) settings.warm_start = &warm;
    Solution sol = solve(prog, settings);
    if (sol.status == SolveStatus::Infeasible)
      throw std::runtime_error("run_subcones: sub-problem infeasible");
    warm = sol.primal;

    double top = 1.0;
    for (int r = 0; r < sol.duals.size(); ++r) top = std::max(top, sol.duals(r));
    std::vector<std::pair<PointIndex, Vec2i>> additions;
    for (std::size_t r = 0; r < sys.size(); ++r) {
      const LinearForm& row = sys.rows[r];
      if (row.kind != FormKind::P && row.kind != FormKind::H) continue;
      if (sol.duals(static_cast<int>(fixed + r)) > opts.multiplier_tol * top)
        additions.emplace_back(grid.index_of(row.x), row.e);
    }

    IterationStat stat;
    stat.stencil_count = run.stencils.count();
    stat.constraint_count = static_cast<long long>(sys.size());
    stat.objective = sol.objective;
    stat.additions = static_cast<long long>(additions.size());
    stat.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.iterations.push_back(stat);
    run.solution = std::move(sol);

    if (additions.empty()) {
      run.converged = true;
      return run;
    }
    run.stencils = refine(run.stencils, additions);
  }
  return run;
}

// One-shot minimization over the full cone (FullConv or DConvX).
inline Solution solve_direct(const EnergyModel& energy, const GridDomain& grid,
                             ConeFamily family = ConeFamily::Conv, const SolveSettings& settings = {}) {
  ConeSpec cone = family == ConeFamily::Conv ? ConeSpec::full() : ConeSpec::dconv_full();
  ConstraintSystem sys = assemble(grid, cone);
  ConvexProgram prog = detail::build_program(energy, sys);
  return solve(prog, settings);
}

// L2 projection energy 1/2 || u - target ||^2.
inline EnergyModel projection_energy(const GridDomain& grid, std::span<const double> target) {
  EnergyModel energy(grid.size());
  for (int i = 0; i < energy.n; ++i) {
    energy.quadratic.emplace_back(i, i, 1.0);
    energy.linear(i) = -target[static_cast<std::size_t>(i)];
  }
  return energy;
}

// Values of the largest convex minorant of u on X, obtained by maximizing the
// sum of values over {v in Conv(X), v <= u} with adaptive stencils. The
// feasible set is closed under pointwise max, so the sum-optimal point is the
// envelope. Complements the brute-force hull oracle at sizes it cannot reach.
inline std::vector<double> envelope_via_refinement(const GridDomain& grid,
                                                   std::span<const double> u,
                                                   const RefineOptions& base_opts = {}) {
  EnergyModel energy(grid.size());
  for (int i = 0; i < energy.n; ++i) {
    energy.linear(i) = -1.0;
    energy.fixed_rows.push_back(
        {{i, -1.0}, {energy.n, u[static_cast<std::size_t>(i)]}});  // u_i - v_i >= 0
  }
  RefineOptions opts = base_opts;
  opts.family = ConeFamily::Conv;
  RefinementRun run = run_supercones(energy, grid, opts);
  if (!run.converged) throw std::runtime_error("envelope_via_refinement: did not converge");
  return std::vector<double>(run.solution.primal.data(), run.solution.primal.data() + energy.n);
}

}  // namespace gridconv
