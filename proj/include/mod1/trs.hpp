#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>

#include "mod1/common.hpp"
#include "mod1/grid_graph.hpp"
#include "mod1/pcg.hpp"

namespace mod1 {

// Sphere relaxation of the circle-constrained smoothing problem: minimize
//   gbar^T H gbar - 2 gbar^T zbar,   H = diag(lambda L, lambda L),
// over ||gbar||^2 = n, with gbar in R^{2n} stacking [Re; Im] of the complex iterate.
// gbar solves the problem iff it is feasible and some multiplier mu >= 0 satisfies
// (2H + mu I) gbar = 2 zbar with 2H + mu I positive semidefinite. The graph is
// connected, so H has nullspace spanned by the two stacked constant vectors
// q1 = [1;0]/sqrt(n), q2 = [0;1]/sqrt(n) and semidefiniteness is exactly mu >= 0.
struct TrsProblem {
  double lambda = 0.1;
  const SparseLaplacian* laplacian = nullptr;  // not owned
  Eigen::VectorXd zbar;                        // length 2n
};

enum class TrsCase {
  EasyNotPerp,   // zbar has weight on the constant modes; unique multiplier in (0, 2||z||/sqrt(n)]
  PerpInterior,  // zbar perpendicular to the constant modes, secular equation still has a root
  HardCase,      // multiplier 0; solution completed along q1 to reach the sphere
};

struct TrsSolution {
  Eigen::VectorXd gbar;
  double mu_star = 0.0;
  double objective = 0.0;
  TrsCase case_tag = TrsCase::EasyNotPerp;
  double theta = 0.0;  // completion magnitude in the hard case, nonnegative by convention
  int root_iterations = 0;
  std::int64_t cg_iterations = 0;
  double norm_residual = 0.0;  // | ||gbar||^2 - n |
  double kkt_residual = 0.0;   // || (2H + mu I) gbar - 2 zbar ||
};

struct TrsOptions {
  double tol = 1e-9;  // sphere feasibility target, | ||g||^2 - n | <= tol * n
  int max_root_iterations = 200;
};

inline void validate(const TrsProblem& problem) {
  if (problem.laplacian == nullptr) throw std::invalid_argument("solver needs a Laplacian");
  if (!(problem.lambda >= 0.0) || !std::isfinite(problem.lambda))
    throw std::invalid_argument("smoothing weight must be finite and >= 0");
  if (problem.zbar.size() != 2 * problem.laplacian->n())
    throw std::invalid_argument("stacked data vector must have length 2n");
}

// (2H + mu I) x using one sparse Laplacian product per half; nothing dense is formed.
inline Eigen::VectorXd apply_shifted(const TrsProblem& problem, double mu,
                                     const Eigen::VectorXd& x) {
  const std::int64_t n = problem.laplacian->n();
  Eigen::VectorXd y(2 * n);
  y.head(n) = 2.0 * problem.lambda * (problem.laplacian->matrix * x.head(n)) + mu * x.head(n);
  y.tail(n) = 2.0 * problem.lambda * (problem.laplacian->matrix * x.tail(n)) + mu * x.tail(n);
  return y;
}

// Coefficients of zbar along the nullspace of H: c1 = <zbar, q1>, c2 = <zbar, q2>.
inline std::pair<double, double> null_coefficients(const TrsProblem& problem) {
  const std::int64_t n = problem.laplacian->n();
  const double root_n = std::sqrt(static_cast<double>(n));
  return {problem.zbar.head(n).sum() / root_n, problem.zbar.tail(n).sum() / root_n};
}

namespace detail {

// Solves (2H + mu I) g = 2 zbar half by half; the blocks decouple into two n-point
// systems with the operator 2 lambda L + mu I. g is warm-start in, solution out.
inline std::int64_t solve_shifted(const TrsProblem& problem, double mu, Eigen::VectorXd& g,
                                  double cg_rel_tol, bool deflate_mean) {
  const std::int64_t n = problem.laplacian->n();
  const auto& L = problem.laplacian->matrix;
  const double lambda = problem.lambda;
  auto apply = [&](const Eigen::VectorXd& p, Eigen::VectorXd& q) {
    q.noalias() = 2.0 * lambda * (L * p);
    if (mu != 0.0) q += mu * p;
  };
  Eigen::VectorXd diag = 2.0 * lambda * problem.laplacian->degree;
  diag.array() += mu;
  Eigen::VectorXd inv_diag =
      (diag.array() > 0.0).select(diag.array().inverse(), 1.0).matrix();

  std::int64_t total = 0;
  for (int half = 0; half < 2; ++half) {
    Eigen::VectorXd x = half == 0 ? g.head(n) : g.tail(n);
    const Eigen::VectorXd b = 2.0 * (half == 0 ? problem.zbar.head(n) : problem.zbar.tail(n));
    const PcgReport report = pcg(apply, inv_diag, b, x, cg_rel_tol, 20 * n, deflate_mean);
    if (!report.converged)
      throw numerical_error("conjugate gradients stalled at relative residual " +
                            std::to_string(report.rel_residual));
    if (half == 0)
      g.head(n) = x;
    else
      g.tail(n) = x;
    total += report.iterations;
  }
  return total;
}

}  // namespace detail

// Squared norm of the shifted solve, phi(mu) = || 2 (2H + mu I)^{-1} zbar ||^2. The
// multiplier solves phi(mu) = n. At mu = 0 the operator is singular; the value is only
// finite when zbar carries no weight on the constant modes, in which case the
// pseudoinverse solve on the mean-zero subspace is returned.
inline double phi(const TrsProblem& problem, double mu, double cg_rel_tol = 1e-11) {
  validate(problem);
  const std::int64_t n = problem.laplacian->n();
  if (mu < 0.0) throw std::invalid_argument("shift must be >= 0");
  if (mu == 0.0) {
    const auto [c1, c2] = null_coefficients(problem);
    if (c1 * c1 + c2 * c2 > 1e-10 * static_cast<double>(n))
      throw std::invalid_argument(
          "phi diverges at zero shift unless zbar is perpendicular to the constant modes");
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
  detail::solve_shifted(problem, mu, g, cg_rel_tol, mu == 0.0);
  return g.squaredNorm();
}

inline TrsSolution solve_trs(const TrsProblem& problem, const TrsOptions& opts = {}) {
  validate(problem);
  const std::int64_t n = problem.laplacian->n();
  const double dn = static_cast<double>(n);
  const double root_n = std::sqrt(dn);
  const double cg_rel_tol = opts.tol / 100.0;

  TrsSolution sol;
  auto finish = [&](TrsSolution& s) {
    const Eigen::VectorXd hg = apply_shifted(problem, 0.0, s.gbar);
    s.objective = 0.5 * s.gbar.dot(hg) - 2.0 * s.gbar.dot(problem.zbar);
    s.kkt_residual = (hg + s.mu_star * s.gbar - 2.0 * problem.zbar).norm();
    s.norm_residual = std::abs(s.gbar.squaredNorm() - dn);
    return s;
  };

  // With no smoothing the quadratic term vanishes and the sphere minimizer of the
  // linear term is the scaled data itself. The generic nullspace test below assumes a
  // rank-2 nullspace and does not apply.
  if (problem.lambda == 0.0 && problem.zbar.norm() > 0.0) {
    sol.case_tag = TrsCase::EasyNotPerp;
    sol.gbar = (root_n / problem.zbar.norm()) * problem.zbar;
    sol.mu_star = 2.0 * problem.zbar.norm() / root_n;
    return finish(sol);
  }

  const auto [c1, c2] = null_coefficients(problem);
  const bool perpendicular = c1 * c1 + c2 * c2 <= 1e-10 * dn;

  double phi0 = std::numeric_limits<double>::infinity();
  Eigen::VectorXd g0;
  if (perpendicular) {
    // Pseudoinverse solve H^+ zbar on the mean-zero subspace of each half.
    g0 = Eigen::VectorXd::Zero(2 * n);
    sol.cg_iterations += detail::solve_shifted(problem, 0.0, g0, cg_rel_tol, true);
    phi0 = g0.squaredNorm();
    if (phi0 <= dn) {
      // Hard case: the multiplier is 0 and the sphere is reached along a nullspace
      // direction. Tie-break: the stacked constant q1 with a nonnegative coefficient.
      sol.case_tag = TrsCase::HardCase;
      sol.mu_star = 0.0;
      sol.theta = std::sqrt(dn - phi0);
      sol.gbar = g0;
      sol.gbar.head(n).array() += sol.theta / root_n;
      return finish(sol);
    }
    sol.case_tag = TrsCase::PerpInterior;
  } else {
    sol.case_tag = TrsCase::EasyNotPerp;
  }

  // Secular root find for phi(mu) = n. phi is convex and strictly decreasing, diverges
  // at 0 in the non-perpendicular case (value phi0 > n otherwise), and satisfies
  // phi(2||z||/sqrt(n)) <= n, so the root is bracketed. Newton from the right edge
  // stays right of the root by convexity and decreases monotonically; any iterate that
  // leaves the bracket falls back to bisection. The derivative
  // phi'(mu) = -2 g(mu)^T (2H + mu I)^{-1} g(mu) costs one extra shifted solve.
  double lo = 0.0;
  double hi = 2.0 * problem.zbar.norm() / root_n;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(2 * n);
  double mu = hi;
  sol.cg_iterations += detail::solve_shifted(problem, mu, g, cg_rel_tol, false);
  double gap = g.squaredNorm() - dn;
  for (int guard = 0; gap > opts.tol * dn && guard < 8; ++guard) {
    // phi(hi) <= n holds exactly; being here means CG roundoff, widen a little.
    hi *= 1.0 + 1e-12;
    mu = hi;
    sol.cg_iterations += detail::solve_shifted(problem, mu, g, cg_rel_tol, false);
    gap = g.squaredNorm() - dn;
  }

  bool converged = std::abs(gap) <= opts.tol * dn;
  while (!converged && sol.root_iterations < opts.max_root_iterations) {
    ++sol.root_iterations;
    if (gap > 0.0)
      lo = mu;
    else
      hi = mu;
    w = g;  // warm start the derivative solve
    sol.cg_iterations += detail::solve_shifted(
        TrsProblem{problem.lambda, problem.laplacian, 0.5 * g}, mu, w, cg_rel_tol, false);
    const double dphi = -2.0 * g.dot(w);
    double next = mu - gap / dphi;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    mu = next;
    sol.cg_iterations += detail::solve_shifted(problem, mu, g, cg_rel_tol, false);
    gap = g.squaredNorm() - dn;
    converged = std::abs(gap) <= opts.tol * dn;
  }
  if (!converged)
    throw numerical_error("secular equation root find did not reach tolerance, gap " +
                          std::to_string(gap));
  sol.mu_star = mu;
  sol.gbar = g;
  return finish(sol);
}

struct KktReport {
  double stationarity_residual;  // || (2H + mu I) g - 2 zbar ||
  double norm_gap;               // | ||g||^2 - n |
  double psd_margin;             // = mu; 2H has smallest eigenvalue 0, so 2H + mu I is PSD iff mu >= 0
  bool stationary;
  bool feasible;
};

inline KktReport verify_kkt(const TrsProblem& problem, const TrsSolution& sol,
                            double tol = 1e-6) {
  validate(problem);
  const double dn = static_cast<double>(problem.laplacian->n());
  KktReport report;
  report.stationarity_residual =
      (apply_shifted(problem, sol.mu_star, sol.gbar) - 2.0 * problem.zbar).norm();
  report.norm_gap = std::abs(sol.gbar.squaredNorm() - dn);
  report.psd_margin = sol.mu_star;
  report.stationary = report.stationarity_residual <= tol * std::sqrt(dn);
  report.feasible = report.norm_gap <= tol * dn;
  return report;
}

}  // namespace mod1
