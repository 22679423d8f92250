#pragma once

// Embedded sparse convex-program solver: minimize 1/2 u'Qu + c'u subject to
// sparse linear inequalities and variable lower bounds, by a Mehrotra
// predictor-corrector primal-dual interior point method. Normal equations go
// through Eigen's sparse LDLT (dense Cholesky fallback when the pattern
// fills in). Duals come out per inequality row and per bound.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridconv {

// Inequality rows are Sum_k w_k u_{col_k} + const >= 0; the constant is
// carried as a coefficient on the homogenization column n (pinned to one),
// which keeps assembly from linear forms uniform.
struct ConvexProgram {
  int n = 0;
  std::vector<Eigen::Triplet<double>> quadratic;  // symmetric PSD part, both halves
  Eigen::VectorXd linear;                         // c
  std::vector<int> row_ptr{0};                    // CSR over (col, coeff)
  std::vector<int> col;
  std::vector<double> coeff;
  std::vector<double> lower;  // per-variable lower bound, -inf when absent

  static constexpr double kNoBound = -std::numeric_limits<double>::infinity();

  explicit ConvexProgram(int vars = 0) { resize(vars); }

  void resize(int vars) {
    n = vars;
    linear = Eigen::VectorXd::Zero(vars);
    lower.assign(static_cast<std::size_t>(vars), kNoBound);
  }

  int constant_column() const { return n; }
  int row_count() const { return static_cast<int>(row_ptr.size()) - 1; }

  void add_row(std::span<const std::pair<int, double>> terms) {
    bool any = false;
    for (const auto& [j, w] : terms) {
      if (j < 0 || j > n) throw std::invalid_argument("add_row: column out of range");
      if (w != 0.0) {
        col.push_back(j);
        coeff.push_back(w);
        any = any || j < n;
      }
    }
    if (!any) throw std::invalid_argument("add_row: empty row");
    row_ptr.push_back(static_cast<int>(col.size()));
  }

  void add_quadratic(int i, int j, double v) {
    if (v == 0.0) return;
    quadratic.emplace_back(i, j, v);
    if (i != j) quadratic.emplace_back(j, i, v);
  }

  // Splits the homogenized rows into A u >= b.
  void matrix(Eigen::SparseMatrix<double>& A, Eigen::VectorXd& b) const {
    const int m = row_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(col.size());
    b = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r)
      for (int k = row_ptr[static_cast<std::size_t>(r)]; k < row_ptr[static_cast<std::size_t>(r) + 1]; ++k) {
        if (col[static_cast<std::size_t>(k)] == n)
          b(r) -= coeff[static_cast<std::size_t>(k)];
        else
          trip.emplace_back(r, col[static_cast<std::size_t>(k)], coeff[static_cast<std::size_t>(k)]);
      }
    A.resize(m, n);
    A.setFromTriplets(trip.begin(), trip.end());
  }

  double objective(const Eigen::VectorXd& u) const {
    Eigen::SparseMatrix<double> Q(n, n);
    Q.setFromTriplets(quadratic.begin(), quadratic.end());
    return 0.5 * u.dot(Q * u) + linear.dot(u);
  }
};

enum class SolveStatus { Optimal, Infeasible, MaxIter };

struct SolveSettings {
  double tol_rel = 1e-9;
  int max_iter = 200;
  const Eigen::VectorXd* warm_start = nullptr;
  double regularization = 1e-12;
};

struct Solution {
  SolveStatus status = SolveStatus::MaxIter;
  Eigen::VectorXd primal;
  Eigen::VectorXd duals;        // one per inequality row, >= 0
  Eigen::VectorXd bound_duals;  // one per variable (0 where unbounded)
  double objective = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  double complementarity = 0;
  int iterations = 0;
};

namespace detail {

// Factorization of the augmented KKT matrix
//   [ Q + dp I      A^T        ]
//   [ A         -(S/Lambda+dd I)]
// which is symmetric quasi-definite, so the unpivoted sparse LDLT is stable.
// A dense pivoted LDLT handles small systems.
class KktSolver {
 public:
  void init(const Eigen::SparseMatrix<double>& Q, const Eigen::SparseMatrix<double>& A,
            double primal_reg) {
    n_ = static_cast<int>(Q.rows());
    m_ = static_cast<int>(A.rows());
    base_.clear();
    for (int k = 0; k < Q.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(Q, k); it; ++it)
        base_.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int i = 0; i < n_; ++i) base_.emplace_back(i, i, primal_reg);
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
        base_.emplace_back(n_ + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        base_.emplace_back(static_cast<int>(it.col()), n_ + static_cast<int>(it.row()), it.value());
      }
    dense_ = n_ + m_ <= 500;
    analyzed_ = false;
  }

  // d2 holds the negated (2,2)-block diagonal values (positive numbers).
  bool factor(const Eigen::VectorXd& d2) {
    std::vector<Eigen::Triplet<double>> trip = base_;
    for (int i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, -d2(i));
    K_.resize(n_ + m_, n_ + m_);
    K_.setFromTriplets(trip.begin(), trip.end());
    if (dense_) {
      dense_ldlt_.compute(Eigen::MatrixXd(K_));
      return dense_ldlt_.info() == Eigen::Success;
    }
    if (!analyzed_) {
      ldlt_.analyzePattern(K_);
      analyzed_ = true;
    }
    ldlt_.factorize(K_);
    return ldlt_.info() == Eigen::Success;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = dense_ ? Eigen::VectorXd(dense_ldlt_.solve(rhs)) : Eigen::VectorXd(ldlt_.solve(rhs));
    for (int r = 0; r < 2; ++r) {
      Eigen::VectorXd resid = rhs - K_ * x;
      if (resid.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
      if (dense_)
        x += dense_ldlt_.solve(resid);
      else
        x += ldlt_.solve(resid);
    }
    return x;
  }

 private:
  int n_ = 0, m_ = 0;
  bool dense_ = false;
  bool analyzed_ = false;
  std::vector<Eigen::Triplet<double>> base_;
  Eigen::SparseMatrix<double> K_;
  Eigen::LDLT<Eigen::MatrixXd> dense_ldlt_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace detail

namespace detail {

// Active-set polish: guess the active rows from the lambda/s split, solve the
// equality-constrained KKT system exactly, and repair the guess a few times.
// Returns true when the polished point satisfies the KKT conditions.
inline bool polish(const Eigen::SparseMatrix<double>& Q, const Eigen::VectorXd& c,
                   const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                   double tol, Eigen::VectorXd& x, Eigen::VectorXd& s, Eigen::VectorXd& lam) {
  const int n = static_cast<int>(Q.rows());
  const int m = static_cast<int>(A.rows());
  std::vector<char> active(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) active[static_cast<std::size_t>(i)] = lam(i) > s(i);

  const double bscale = 1.0 + b.lpNorm<Eigen::Infinity>();
  const double cscale = 1.0 + c.lpNorm<Eigen::Infinity>();

  for (int round = 0; round < 12; ++round) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (active[static_cast<std::size_t>(i)]) act.push_back(i);
    const int k = static_cast<int>(act.size());

    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < Q.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(Q, col); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    const double reg = 1e-11;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, reg);
    for (int j = 0; j < k; ++j) trip.emplace_back(n + j, n + j, -reg);
    Eigen::SparseMatrix<double> At = A.transpose();
    for (int j = 0; j < k; ++j) {
      const int row = act[static_cast<std::size_t>(j)];
      for (Eigen::SparseMatrix<double>::InnerIterator it(At, row); it; ++it) {
        trip.emplace_back(static_cast<int>(it.row()), n + j, -it.value());  // -A_act^T
        trip.emplace_back(n + j, static_cast<int>(it.row()), it.value());   // A_act
      }
    }
    Eigen::SparseMatrix<double> K(n + k, n + k);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd rhs(n + k);
    rhs.head(n) = -c;
    for (int j = 0; j < k; ++j) rhs(n + j) = b(act[static_cast<std::size_t>(j)]);

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) {
#ifdef GRIDCONV_POLISH_TRACE
      std::fprintf(stderr, "polish round %d: LU failed (k=%d)\n", round, k);
#endif
      return false;
    }
    Eigen::VectorXd sol = lu.solve(rhs);

    Eigen::VectorXd xp = sol.head(n);
    Eigen::VectorXd lp = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < k; ++j) lp(act[static_cast<std::size_t>(j)]) = sol(n + j);
    Eigen::VectorXd sp = A * xp - b;

    // Redundant active rows split their multipliers arbitrarily; only chase
    // genuinely wrong signs, and clamp noise-level negatives at the end.
    const double drop_tol = 1e-7 * (1.0 + lp.lpNorm<Eigen::Infinity>());
    bool adjusted = false;
    for (int i = 0; i < m; ++i) {
      if (active[static_cast<std::size_t>(i)] && lp(i) < -drop_tol) {
        active[static_cast<std::size_t>(i)] = false;
        adjusted = true;
      } else if (!active[static_cast<std::size_t>(i)] && sp(i) < -tol * bscale) {
        active[static_cast<std::size_t>(i)] = true;
        adjusted = true;
      }
    }
#ifdef GRIDCONV_POLISH_TRACE
    {
      Eigen::VectorXd rdp = Q * xp + c - At * lp;
      std::fprintf(stderr, "polish round %d: k=%d adjusted=%d rd=%.3e\n", round, k, adjusted,
                   rdp.lpNorm<Eigen::Infinity>());
    }
#endif
    if (adjusted) continue;

    Eigen::VectorXd rd = Q * xp + c - At * lp;
    double dual_scale = cscale + (Q * xp).lpNorm<Eigen::Infinity>() + (At * lp).lpNorm<Eigen::Infinity>();
    if (rd.lpNorm<Eigen::Infinity>() > tol * dual_scale) return false;
    x = xp;
    lam = lp.cwiseMax(0.0);
    s = sp.cwiseMax(0.0);
    return true;
  }
  return false;
}

}  // namespace detail

inline Solution solve(const ConvexProgram& prog, const SolveSettings& settings = {}) {
  const int n = prog.n;
  Eigen::SparseMatrix<double> A0;
  Eigen::VectorXd b0;
  prog.matrix(A0, b0);

  // Fold finite lower bounds in as extra rows u_i >= l_i.
  std::vector<int> bound_var;
  for (int i = 0; i < n; ++i)
    if (prog.lower[static_cast<std::size_t>(i)] != ConvexProgram::kNoBound) bound_var.push_back(i);
  const int m0 = static_cast<int>(A0.rows());
  const int m = m0 + static_cast<int>(bound_var.size());
  if (m == 0) throw std::invalid_argument("solve: program has no constraints");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(A0.nonZeros()) + bound_var.size());
  for (int k = 0; k < A0.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A0, k); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  Eigen::VectorXd b(m);
  b.head(m0) = b0;
  for (std::size_t k = 0; k < bound_var.size(); ++k) {
    trip.emplace_back(m0 + static_cast<int>(k), bound_var[k], 1.0);
    b(m0 + static_cast<int>(k)) = prog.lower[static_cast<std::size_t>(bound_var[k])];
  }
  Eigen::SparseMatrix<double> A(m, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> At = A.transpose();

  Eigen::SparseMatrix<double> Q(n, n);
  Q.setFromTriplets(prog.quadratic.begin(), prog.quadratic.end());

  const double bscale = 1.0 + b.lpNorm<Eigen::Infinity>();
  const double cscale = 1.0 + prog.linear.lpNorm<Eigen::Infinity>();

  // Starting point: warm primal if provided, slacks/duals pushed to O(1).
  Eigen::VectorXd x = settings.warm_start && settings.warm_start->size() == n
                          ? *settings.warm_start
                          : Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = A * x - b;
  for (int i = 0; i < m; ++i) s(i) = std::max(s(i), 1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);

  detail::KktSolver kkt;
  kkt.init(Q, A, settings.regularization);
  Solution sol;
  sol.primal = x;

  double best_mu = std::numeric_limits<double>::infinity();
  int stall = 0;

  auto finalize = [&](SolveStatus status) {
    sol.status = status;
    sol.primal = x;
    sol.duals = lam.head(m0);
    sol.bound_duals = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < bound_var.size(); ++k)
      sol.bound_duals(bound_var[k]) = lam(m0 + static_cast<int>(k));
    sol.objective = prog.objective(x);
    return sol;
  };

  auto refresh_residuals = [&]() {
    sol.primal_residual = (A * x - s - b).lpNorm<Eigen::Infinity>() / bscale;
    sol.dual_residual = (Q * x + prog.linear - At * lam).lpNorm<Eigen::Infinity>() / cscale;
    sol.complementarity = s.dot(lam) / m / (1.0 + std::abs(prog.objective(x)));
  };

  auto try_polish = [&](SolveStatus fallback) {
    if (detail::polish(Q, prog.linear, A, b, settings.tol_rel, x, s, lam)) {
      refresh_residuals();
      return finalize(SolveStatus::Optimal);
    }
    refresh_residuals();
    return finalize(fallback);
  };

  for (int iter = 0; iter < settings.max_iter; ++iter) {
    Eigen::VectorXd rd = Q * x + prog.linear - At * lam;     // dual residual
    Eigen::VectorXd rp = A * x - s - b;                      // primal residual
    double mu = s.dot(lam) / m;

    sol.iterations = iter;
    sol.primal_residual = rp.lpNorm<Eigen::Infinity>() / bscale;
    sol.dual_residual = rd.lpNorm<Eigen::Infinity>() / cscale;
    sol.complementarity = mu / (1.0 + std::abs(prog.objective(x)));
    if (sol.primal_residual <= settings.tol_rel && sol.dual_residual <= settings.tol_rel &&
        sol.complementarity <= settings.tol_rel)
      return finalize(SolveStatus::Optimal);

    // Complementarity resolved but duals lagging: polish the active set.
    if (mu <= std::max(1e-30, 1e-4 * settings.tol_rel) && sol.primal_residual <= settings.tol_rel)
      return try_polish(SolveStatus::MaxIter);

    // Stagnation: either the problem is infeasible or the iteration is
    // grinding against finite precision.
    if (mu < 0.9 * best_mu) {
      best_mu = mu;
      stall = 0;
    } else if (++stall > 30) {
      if (sol.primal_residual > 1e-6) return finalize(SolveStatus::Infeasible);
      return try_polish(SolveStatus::MaxIter);
    }

    // Augmented-system (2,2) block: S/Lambda, clamped and regularized.
    Eigen::VectorXd d2(m);
    for (int i = 0; i < m; ++i)
      d2(i) = std::clamp(s(i) / lam(i), 1e-16, 1e16) + settings.regularization;
    if (!kkt.factor(d2)) return try_polish(SolveStatus::MaxIter);

    auto newton = [&](const Eigen::VectorXd& rc) {
      // [Q A'; A -D2] [dx; y] = [-rd; -rp - rc/Lambda], then dl = -y.
      Eigen::VectorXd rhs(n + m);
      rhs.head(n) = -rd;
      rhs.tail(m) = -rp - rc.cwiseQuotient(lam);
      Eigen::VectorXd sol_xy = kkt.solve(rhs);
      Eigen::VectorXd dx = sol_xy.head(n);
      Eigen::VectorXd dl = -sol_xy.tail(m);
      Eigen::VectorXd ds = A * dx + rp;
      return std::tuple<Eigen::VectorXd, Eigen::VectorXd, Eigen::VectorXd>{dx, ds, dl};
    };
    auto max_step = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
      double a = 1.0;
      for (int i = 0; i < m; ++i)
        if (dv(i) < 0) a = std::min(a, -v(i) / dv(i));
      return a;
    };

    // Predictor.
    Eigen::VectorXd rc_aff = s.cwiseProduct(lam);
    auto [dx_aff, ds_aff, dl_aff] = newton(rc_aff);
    double ap_aff = max_step(s, ds_aff);
    double ad_aff = max_step(lam, dl_aff);
    double mu_aff = (s + ap_aff * ds_aff).dot(lam + ad_aff * dl_aff) / m;
    double sigma = std::pow(mu_aff / mu, 3.0);
    sigma = std::min(std::max(sigma, 1e-8), 0.999);

    // Corrector.
    Eigen::VectorXd rc = rc_aff + ds_aff.cwiseProduct(dl_aff) -
                         Eigen::VectorXd::Constant(m, sigma * mu);
    auto [dx, ds, dl] = newton(rc);
    const double eta = std::clamp(1.0 - 10.0 * mu, 0.995, 0.99995);
    double ap = std::min(1.0, eta * max_step(s, ds));
    double ad = std::min(1.0, eta * max_step(lam, dl));

#ifdef GRIDCONV_IPM_TRACE
    std::fprintf(stderr, "it=%3d mu=%9.3e rp=%9.3e rd=%9.3e sigma=%6.4f ap=%7.5f ad=%7.5f\n",
                 iter, mu, sol.primal_residual, sol.dual_residual, sigma, ap, ad);
#endif

    x += ap * dx;
    s += ap * ds;
    lam += ad * dl;
  }
  return try_polish(SolveStatus::MaxIter);
}

// Rows whose multiplier clears threshold * max(1, largest multiplier).
inline std::vector<int> active_rows(const Solution& sol, double threshold) {
  double top = 1.0;
  for (int i = 0; i < sol.duals.size(); ++i) top = std::max(top, sol.duals(i));
  std::vector<int> out;
  for (int i = 0; i < sol.duals.size(); ++i)
    if (sol.duals(i) > threshold * top) out.push_back(i);
  return out;
}

// Matrix-Market export of the inequality matrix plus a JSON header with the
// objective and bounds.
inline void export_program(const ConvexProgram& prog, const std::string& mm_path,
                           const std::string& json_path) {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  prog.matrix(A, b);
  {
    std::ofstream out(mm_path);
    if (!out) throw std::runtime_error("cannot open " + mm_path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
    out.precision(17);
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
        out << (it.row() + 1) << " " << (it.col() + 1) << " " << it.value() << "\n";
  }
  std::ofstream out(json_path);
  if (!out) throw std::runtime_error("cannot open " + json_path);
  out.precision(17);
  out << "{\n  \"n\": " << prog.n << ",\n  \"rhs\": [";
  for (int i = 0; i < b.size(); ++i) out << (i ? "," : "") << b(i);
  out << "],\n  \"linear\": [";
  for (int i = 0; i < prog.linear.size(); ++i) out << (i ? "," : "") << prog.linear(i);
  out << "],\n  \"quadratic\": [";
  for (std::size_t k = 0; k < prog.quadratic.size(); ++k) {
    const auto& t = prog.quadratic[k];
    out << (k ? "," : "") << "[" << t.row() << "," << t.col() << "," << t.value() << "]";
  }
  out << "],\n  \"lower\": [";
  for (int i = 0; i < prog.n; ++i) {
    out << (i ? "," : "");
    if (prog.lower[static_cast<std::size_t>(i)] == ConvexProgram::kNoBound)
      out << "null";
    else
      out << prog.lower[static_cast<std::size_t>(i)];
  }
  out << "]\n}\n";
}

}  // namespace gridconv
