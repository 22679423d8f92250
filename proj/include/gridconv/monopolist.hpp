#pragma once

// The monopolist (principal-agent) problem family: finite-difference
// discretization of the net-utility energy over discrete convex cones, exact
// profit of the induced global catalog, economic reports (exclusion,
// bunching, sales, margins), and the baseline constraint systems used for
// method comparisons.

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridconv/delaunay.hpp"
#include "gridconv/geometry.hpp"
#include "gridconv/refine.hpp"

namespace gridconv {

enum class CostModel { Quadratic, BundleBox, None };

inline const char* to_string(CostModel c) {
  switch (c) {
    case CostModel::Quadratic: return "quadratic";
    case CostModel::BundleBox: return "bundle";
    case CostModel::None: return "none";
  }
  return "?";
}

struct MonopolistInstance {
  ConvexPolygon support;   // uniform customer density support
  double weight = 1.0;     // density value on the support
  CostModel cost = CostModel::Quadratic;
  double rotation = 0.0;   // support rotation used to build it (bookkeeping)

  // Quadratic production cost, customers uniform on [1,2]^2 rotated around
  // its center.
  static MonopolistInstance classical(double rotation = 0.0) {
    return {ConvexPolygon::rotated_square(1.0, 2.0, rotation), 1.0, CostModel::Quadratic, rotation};
  }

  // Product bundles: zero cost on the unit square of (possibly probabilistic)
  // bundles, customers uniform on [0,1]^2.
  static MonopolistInstance bundles() {
    return {ConvexPolygon::rectangle(0, 0, 1, 1), 1.0, CostModel::BundleBox, 0.0};
  }

  double total_mass() const { return weight * support.area(); }
};

// n x n axis-aligned grid over the bounding box of the density support.
inline GridDomain instance_grid(const MonopolistInstance& instance, int n) {
  auto [lo, hi] = instance.support.bounds();
  const double side = std::max(hi.x - lo.x, hi.y - lo.y);
  return GridDomain::square(lo.x, lo.x + side, n);
}

namespace detail {

// Quadrature weight of a grid point: area of its lattice cell clipped by the
// density support.
inline std::vector<double> cell_weights(const MonopolistInstance& instance, const GridDomain& grid) {
  std::vector<double> mu(static_cast<std::size_t>(grid.size()));
  for (PointIndex i = 0; i < grid.size(); ++i) {
    Vec2i z = grid.point(i);
    std::vector<Vec2d> cell;
    for (auto [da, db] : {std::pair{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}) {
      Vec2d corner{static_cast<double>(z.a) + da, static_cast<double>(z.b) + db};
      cell.push_back(rotate(Vec2d{grid.xi().x + corner.x, grid.xi().y + corner.y}, grid.theta()) *
                     grid.h());
    }
    mu[static_cast<std::size_t>(i)] =
        instance.weight * polygon_area(clip_convex(cell, instance.support));
  }
  return mu;
}

struct ForwardDiff {
  PointIndex plus = -1, minus = -1;  // u(plus) - u(minus), scaled by 1/h
  bool valid() const { return plus >= 0 && minus >= 0 && plus != minus; }
};

inline ForwardDiff axis_difference(const GridDomain& grid, PointIndex i, Vec2i axis) {
  Vec2i x = grid.point(i);
  PointIndex fwd = grid.find(x + axis);
  if (fwd >= 0) return {fwd, i};
  PointIndex bwd = grid.find(x - axis);
  if (bwd >= 0) return {i, bwd};
  return {};
}

}  // namespace detail

// Finite-difference discretization of the (negated) profit functional:
//   Quadratic: sum mu_x [ 1/2 |Du|^2 - <z, Du> + u ],  with Du >= 0 rows;
//   BundleBox: sum mu_x [ u - <z, Du> ],               with 0 <= Du <= 1 rows;
// plus u >= 0 everywhere. Forward differences, backward at the far boundary.
inline EnergyModel discretize(const MonopolistInstance& instance, const GridDomain& grid) {
  EnergyModel energy(grid.size());
  const double h = grid.h();
  const std::vector<double> mu = detail::cell_weights(instance, grid);

  for (PointIndex i = 0; i < grid.size(); ++i) {
    const double m = mu[static_cast<std::size_t>(i)];
    energy.lower[static_cast<std::size_t>(i)] = 0.0;
    if (m == 0.0) continue;
    const Vec2d z = grid.embed(i);
    energy.linear(i) += m;  // + u(x)
    for (Vec2i axis : {Vec2i{1, 0}, Vec2i{0, 1}}) {
      auto diff = detail::axis_difference(grid, i, axis);
      if (!diff.valid()) continue;
      const double za = axis.a ? z.x : z.y;
      // - <z_a, D_a u>
      energy.linear(diff.plus) += -m * za / h;
      energy.linear(diff.minus) += m * za / h;
      if (instance.cost == CostModel::Quadratic) {
        // + 1/2 (D_a u)^2
        const double w = m / (h * h);
        energy.quadratic.emplace_back(diff.plus, diff.plus, w);
        energy.quadratic.emplace_back(diff.minus, diff.minus, w);
        energy.quadratic.emplace_back(diff.plus, diff.minus, -w);
        energy.quadratic.emplace_back(diff.minus, diff.plus, -w);
      }
    }
  }

  // Gradient-domain rows on every lattice edge, encoding the finiteness of
  // the production cost.
  if (instance.cost != CostModel::None) {
    for (PointIndex i = 0; i < grid.size(); ++i) {
      Vec2i x = grid.point(i);
      for (Vec2i axis : {Vec2i{1, 0}, Vec2i{0, 1}}) {
        PointIndex j = grid.find(x + axis);
        if (j < 0) continue;
        energy.fixed_rows.push_back({{j, 1.0}, {static_cast<int>(i), -1.0}});  // monotone
        if (instance.cost == CostModel::BundleBox)
          energy.fixed_rows.push_back({{static_cast<int>(i), 1.0}, {j, -1.0}, {energy.n, h}});
      }
    }
  }
  return energy;
}

// The discrete objective value of u under the instance energy (the negated
// discrete profit).
inline double discrete_objective(const EnergyModel& energy, std::span<const double> u) {
  Eigen::Map<const Eigen::VectorXd> v(u.data(), static_cast<Eigen::Index>(u.size()));
  double quad = 0;
  for (const auto& t : energy.quadratic) quad += v(t.row()) * t.value() * v(t.col());
  return 0.5 * quad + energy.linear.dot(v);
}

struct ProfitResult {
  double profit = 0;
  bool cost_domain_violated = false;  // gradient left the finite-cost region on positive mass
};

// Exact profit of the largest globally convex catalog below u: the convex
// envelope is interpolated on its Delaunay triangulation, where the gradient
// is constant per triangle and price minus cost integrates in closed form
// against the uniform density.
inline ProfitResult exact_profit(const MonopolistInstance& instance, const GridDomain& grid,
                                 std::span<const double> u) {
  std::vector<double> env(u.begin(), u.end());
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  if (convexity_defect(grid, u) > 1e-7 * scale) env = envelope_via_refinement(grid, u);

  FlipResult flip = flip_to_u_delaunay(standard_delaunay(grid), env, 1e-9, false);
  const Triangulation& T = flip.triangulation;

  ProfitResult out;
  const double grad_tol = 1e-5;
  for (std::size_t t = 0; t < T.size(); ++t) {
    std::vector<Vec2d> tri{grid.embed(T.tris[t][0]), grid.embed(T.tris[t][1]),
                           grid.embed(T.tris[t][2])};
    const double mass = instance.weight * polygon_area(clip_convex(tri, instance.support));
    if (mass <= 0) continue;
    const Vec2d G = triangle_gradient(T, env, t);
    const double beta = env[static_cast<std::size_t>(T.tris[t][0])] - dot(G, tri[0]);
    double cost = 0;
    switch (instance.cost) {
      case CostModel::Quadratic:
        if (G.x < -grad_tol || G.y < -grad_tol) out.cost_domain_violated = true;
        cost = 0.5 * dot(G, G);
        break;
      case CostModel::BundleBox:
        if (G.x < -grad_tol || G.y < -grad_tol || G.x > 1 + grad_tol || G.y > 1 + grad_tol)
          out.cost_domain_violated = true;
        break;
      case CostModel::None:
        break;
    }
    // price - cost = (<G,z> - U(z)) - Cost(G) = -beta - Cost(G), constant on
    // the triangle.
    out.profit += mass * (-beta - cost);
  }
  return out;
}

struct SalesAtom {
  Vec2d product;  // gradient of the catalog on one envelope triangle
  double mass;    // customer mass buying it
  double margin;  // price minus production cost
};

struct EconomicReport {
  double profit = 0;
  double total_mass = 0;
  std::vector<SalesAtom> sales;
  std::vector<char> exclusion;      // per grid point: U < exclusion threshold
  std::vector<char> bunching;       // per interior point: det estimate below band
  std::vector<double> det_estimate; // subgradient-cell Hessian determinant estimate
  bool cost_domain_violated = false;
};

struct ReportThresholds {
  double exclusion = 1e-4;
  double bunching = 0.07;
};

inline EconomicReport economic_report(const MonopolistInstance& instance, const GridDomain& grid,
                                      std::span<const double> u, ReportThresholds thresholds = {}) {
  EconomicReport report;
  std::vector<double> env(u.begin(), u.end());
  double scale = 1.0;
  for (double v : u) scale = std::max(scale, std::abs(v));
  if (convexity_defect(grid, u) > 1e-7 * scale) env = envelope_via_refinement(grid, u);

  FlipResult flip = flip_to_u_delaunay(standard_delaunay(grid), env, 1e-9, false);
  const Triangulation& T = flip.triangulation;
  const double grad_tol = 1e-5;

  for (std::size_t t = 0; t < T.size(); ++t) {
    std::vector<Vec2d> tri{grid.embed(T.tris[t][0]), grid.embed(T.tris[t][1]),
                           grid.embed(T.tris[t][2])};
    const double mass = instance.weight * polygon_area(clip_convex(tri, instance.support));
    if (mass <= 0) continue;
    const Vec2d G = triangle_gradient(T, env, t);
    const double beta = env[static_cast<std::size_t>(T.tris[t][0])] - dot(G, tri[0]);
    double cost = 0;
    if (instance.cost == CostModel::Quadratic) {
      cost = 0.5 * dot(G, G);
      if (G.x < -grad_tol || G.y < -grad_tol) report.cost_domain_violated = true;
    } else if (instance.cost == CostModel::BundleBox) {
      if (G.x < -grad_tol || G.y < -grad_tol || G.x > 1 + grad_tol || G.y > 1 + grad_tol)
        report.cost_domain_violated = true;
    }
    report.sales.push_back({G, mass, -beta - cost});
    report.profit += mass * (-beta - cost);
    report.total_mass += mass;
  }

  report.exclusion.assign(static_cast<std::size_t>(grid.size()), 0);
  for (PointIndex i = 0; i < grid.size(); ++i)
    report.exclusion[static_cast<std::size_t>(i)] = env[static_cast<std::size_t>(i)] < thresholds.exclusion;

  SubgradientCellMap cells = subgradient_cells(grid, env);
  report.bunching.assign(static_cast<std::size_t>(grid.size()), 0);
  report.det_estimate.assign(static_cast<std::size_t>(grid.size()),
                             std::numeric_limits<double>::quiet_NaN());
  for (PointIndex i = 0; i < grid.size(); ++i) {
    const auto& cell = cells.cells[static_cast<std::size_t>(i)];
    if (!cell.interior) continue;
    report.det_estimate[static_cast<std::size_t>(i)] = cell.det_estimate;
    report.bunching[static_cast<std::size_t>(i)] =
        cell.det_estimate < thresholds.bunching &&
        !report.exclusion[static_cast<std::size_t>(i)];
  }
  return report;
}

enum class BaselineMethod { CLRM, OF2, OF3, AdaptiveConv, AdaptiveDConv };

inline const char* to_string(BaselineMethod m) {
  switch (m) {
    case BaselineMethod::CLRM: return "clrm";
    case BaselineMethod::OF2: return "of2";
    case BaselineMethod::OF3: return "of3";
    case BaselineMethod::AdaptiveConv: return "conv";
    case BaselineMethod::AdaptiveDConv: return "dconv";
  }
  return "?";
}

// Fixed stencils V_k(x) = { e in V_max(x) : ||e|| <= k } behind the OF_k
// baselines; a valid family on the square grids these baselines run on.
inline StencilFamily truncated_stencils(const GridDomain& grid, Int k) {
  StencilFamily V(grid);
  for (PointIndex i = 0; i < grid.size(); ++i) {
    std::vector<Vec2i> set;
    for (const Vec2i& e : grid.max_stencil(i))
      if (norm2(e) <= k * k) set.push_back(e);
    V.set(i, std::move(set));
  }
  if (auto bad = validate(V))
    throw std::invalid_argument("truncated_stencils: not a stencil family on this grid");
  return V;
}

// Constraint cone behind a non-adaptive baseline method. OF_k keeps only the
// segment forms along its fixed directions (the wide-stencil directional
// scheme); that is what stabilizes at a positive convexity defect.
inline ConeSpec baseline_cone(BaselineMethod method, const StencilFamily& truncated) {
  switch (method) {
    case BaselineMethod::CLRM: return ConeSpec::full();
    case BaselineMethod::OF2:
    case BaselineMethod::OF3: return ConeSpec::dconv_prime(truncated);
    default: throw std::invalid_argument("baseline_cone: adaptive methods refine, not assemble");
  }
}

}  // namespace gridconv
