#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "mod1/angular.hpp"
#include "mod1/common.hpp"
#include "mod1/grid_graph.hpp"
#include "mod1/rng.hpp"

namespace mod1 {

// First-order solvers that keep the unit-modulus constraint exact instead of relaxing
// it to a sphere: projected (Riemannian) gradient descent on the product of circles,
// and a low-rank factorization of the semidefinite lift over unit-row factors times a
// unit vector. Both minimize lambda g^* L g - 2 Re(g^* z) with Armijo backtracking and
// a normalization retraction, stopping when the tangent gradient norm falls below
// grad_tol * sqrt(n).
struct SolverOptions {
  int max_iterations = 2000;
  double grad_tol = 1e-6;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  double initial_step = 0.0;  // <= 0 picks 1 / (2 + 2 lambda ||L||_bound)
  int rank = 3;               // factor columns for the low-rank lift
  std::uint64_t seed = 0;     // random factor initialization
};

struct SolveInfo {
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
  bool converged = false;
  bool line_search_failed = false;  // backtracking underflowed; the last iterate is returned
  std::vector<double> objective_trace;  // objective after every accepted step
};

struct PhaseSolution {
  Eigen::VectorXcd g;
  SolveInfo info;
};

namespace detail {

// L x for complex x via one real product per part.
inline void apply_lap(const SparseLaplacian& lap, const Eigen::VectorXcd& x,
                      Eigen::VectorXcd& out) {
  const Eigen::VectorXd xr = x.real();
  const Eigen::VectorXd xi = x.imag();
  out.resize(x.size());
  out.real() = lap.matrix * xr;
  out.imag() = lap.matrix * xi;
}

inline double default_step(const SparseLaplacian& lap, double lambda) {
  const double lmax = 2.0 * lap.degree.maxCoeff();  // Gershgorin
  return 1.0 / (2.0 + 2.0 * lambda * lmax);
}

}  // namespace detail

inline double phases_objective(const SparseLaplacian& lap, double lambda,
                               const Eigen::VectorXcd& z, const Eigen::VectorXcd& g) {
  Eigen::VectorXcd Lg;
  detail::apply_lap(lap, g, Lg);
  return lambda * g.dot(Lg).real() - 2.0 * g.dot(z).real();
}

// Euclidean gradient 2 lambda L g - 2 z projected onto the circle tangents:
// grad_i = e_i - Re(e_i conj(g_i)) g_i.
inline Eigen::VectorXcd riemannian_gradient(const SparseLaplacian& lap, double lambda,
                                            const Eigen::VectorXcd& z,
                                            const Eigen::VectorXcd& g) {
  Eigen::VectorXcd Lg;
  detail::apply_lap(lap, g, Lg);
  Eigen::VectorXcd grad(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const std::complex<double> e = 2.0 * lambda * Lg[i] - 2.0 * z[i];
    grad[i] = e - (e.real() * g[i].real() + e.imag() * g[i].imag()) * g[i];
  }
  return grad;
}

inline PhaseSolution solve_phases(const SparseLaplacian& lap, double lambda,
                                  const Eigen::VectorXcd& z, const SolverOptions& opts = {},
                                  const Eigen::VectorXcd* init = nullptr) {
  if (z.size() != lap.n()) throw std::invalid_argument("data length does not match Laplacian");
  if (!(lambda >= 0.0)) throw std::invalid_argument("smoothing weight must be >= 0");
  const Eigen::Index n = z.size();
  const double root_n = std::sqrt(static_cast<double>(n));

  PhaseSolution sol;
  sol.g = init != nullptr ? *init : z;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(sol.g[i]);
    if (a == 0.0)
      throw std::invalid_argument("initial iterate has zero modulus at index " +
                                  std::to_string(i + 1));
    sol.g[i] /= a;
  }

  Eigen::VectorXcd Lg;
  detail::apply_lap(lap, sol.g, Lg);
  double obj = lambda * sol.g.dot(Lg).real() - 2.0 * sol.g.dot(z).real();
  sol.info.objective_trace.push_back(obj);

  double trial = opts.initial_step > 0.0 ? opts.initial_step : detail::default_step(lap, lambda);
  Eigen::VectorXcd grad(n), g_next(n), Lg_next;
  while (sol.info.iterations < opts.max_iterations) {
    // Tangent gradient from the cached product.
    double gn2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const std::complex<double> e = 2.0 * lambda * Lg[i] - 2.0 * z[i];
      grad[i] = e - (e.real() * sol.g[i].real() + e.imag() * sol.g[i].imag()) * sol.g[i];
      gn2 += std::norm(grad[i]);
    }
    sol.info.gradient_norm = std::sqrt(gn2);
    if (sol.info.gradient_norm <= opts.grad_tol * root_n) {
      sol.info.converged = true;
      break;
    }

    double t = trial;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const std::complex<double> c = sol.g[i] - t * grad[i];
        g_next[i] = c / std::abs(c);  // |c| >= 1 since the step is tangent
      }
      detail::apply_lap(lap, g_next, Lg_next);
      const double obj_next =
          lambda * g_next.dot(Lg_next).real() - 2.0 * g_next.dot(z).real();
      if (obj_next <= obj - opts.armijo_c * t * gn2) {
        sol.g.swap(g_next);
        Lg.swap(Lg_next);
        obj = obj_next;
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      sol.info.line_search_failed = true;  // step collapsed to nothing
      break;
    }
    trial = 2.0 * t;
    ++sol.info.iterations;
    sol.info.objective_trace.push_back(obj);
  }
  sol.info.objective = obj;
  return sol;
}

struct BmSolution {
  Eigen::MatrixXcd Y;  // n x p, unit rows
  Eigen::VectorXcd v;  // unit vector in C^p
  PhaseSolution extracted;
  double factor_objective = 0.0;  // objective of (Y, v), lower bound for the circle problem
};

// Low-rank factorization of the lifted problem: minimize
//   lambda <L Y, Y> - 2 Re(z^* Y v)
// over unit-row factors Y and a unit vector v, by projected gradient descent on the
// product manifold. The circle iterate is read off as the normalized rows of Y v.
inline BmSolution solve_burer_monteiro(const SparseLaplacian& lap, double lambda,
                                       const Eigen::VectorXcd& z,
                                       const SolverOptions& opts = {}) {
  if (z.size() != lap.n()) throw std::invalid_argument("data length does not match Laplacian");
  if (!(lambda >= 0.0)) throw std::invalid_argument("smoothing weight must be >= 0");
  if (opts.rank < 1) throw std::invalid_argument("factor rank must be >= 1");
  const Eigen::Index n = z.size();
  const int p = opts.rank;
  const double root_n = std::sqrt(static_cast<double>(n));

  BmSolution sol;
  Rng rng = Rng::stream(opts.seed, 0x626d);
  sol.Y.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) sol.Y(i, c) = std::complex<double>(rng.gaussian(), rng.gaussian());
    sol.Y.row(i).normalize();
  }
  sol.v.resize(p);
  for (int c = 0; c < p; ++c) sol.v[c] = std::complex<double>(rng.gaussian(), rng.gaussian());
  sol.v.normalize();

  auto apply_lap_cols = [&](const Eigen::MatrixXcd& Y, Eigen::MatrixXcd& out) {
    out.resize(Y.rows(), Y.cols());
    Eigen::VectorXcd col, lcol;
    for (int c = 0; c < Y.cols(); ++c) {
      col = Y.col(c);
      detail::apply_lap(lap, col, lcol);
      out.col(c) = lcol;
    }
  };
  auto objective = [&](const Eigen::MatrixXcd& Y, const Eigen::VectorXcd& v,
                       const Eigen::MatrixXcd& LY) {
    double quad = 0.0;
    for (int c = 0; c < p; ++c) quad += Y.col(c).dot(LY.col(c)).real();
    return lambda * quad - 2.0 * (z.adjoint() * Y * v)(0).real();
  };

  Eigen::MatrixXcd LY;
  apply_lap_cols(sol.Y, LY);
  double obj = objective(sol.Y, sol.v, LY);
  SolveInfo& info = sol.extracted.info;
  info.objective_trace.push_back(obj);

  double trial = opts.initial_step > 0.0 ? opts.initial_step : detail::default_step(lap, lambda);
  Eigen::MatrixXcd GY(n, p), Y_next(n, p), LY_next;
  Eigen::VectorXcd Gv(p), v_next(p);
  while (info.iterations < opts.max_iterations) {
    // Euclidean gradients 2 lambda L Y - 2 z v^* and -2 Y^* z, projected to the
    // tangent spaces of the unit rows and the unit vector.
    GY = 2.0 * lambda * LY - 2.0 * z * sol.v.adjoint();
    double gn2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = GY.row(i).dot(sol.Y.row(i)).real();
      GY.row(i) -= s * sol.Y.row(i);
      gn2 += GY.row(i).squaredNorm();
    }
    Gv = -2.0 * sol.Y.adjoint() * z;
    Gv -= sol.v.dot(Gv).real() * sol.v;
    gn2 += Gv.squaredNorm();
    info.gradient_norm = std::sqrt(gn2);
    if (info.gradient_norm <= opts.grad_tol * root_n) {
      info.converged = true;
      break;
    }

    double t = trial;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      Y_next = sol.Y - t * GY;
      for (Eigen::Index i = 0; i < n; ++i) Y_next.row(i).normalize();
      v_next = (sol.v - t * Gv).normalized();
      apply_lap_cols(Y_next, LY_next);
      const double obj_next = objective(Y_next, v_next, LY_next);
      if (obj_next <= obj - opts.armijo_c * t * gn2) {
        sol.Y.swap(Y_next);
        sol.v.swap(v_next);
        LY.swap(LY_next);
        obj = obj_next;
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      info.line_search_failed = true;
      break;
    }
    trial = 2.0 * t;
    ++info.iterations;
    info.objective_trace.push_back(obj);
  }
  sol.factor_objective = obj;

  Eigen::VectorXcd w = sol.Y * sol.v;
  sol.extracted.g.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(w[i]);
    if (a == 0.0)
      throw numerical_error("factor solution has zero modulus at index " + std::to_string(i + 1) +
                            ", cannot read off a circle point");
    sol.extracted.g[i] = w[i] / a;
  }
  sol.extracted.info.objective = phases_objective(lap, lambda, z, sol.extracted.g);
  return sol;
}

}  // namespace mod1
