#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace mod1::detail {

struct PcgReport {
  std::int64_t iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

inline void remove_mean(Eigen::VectorXd& v) { v.array() -= v.mean(); }

// Preconditioned conjugate gradients on a symmetric positive (semi)definite operator.
// `apply(p, q)` writes A p into q. `inv_diag` is the Jacobi preconditioner. With
// `deflate_mean` the solve is restricted to the mean-zero subspace, which handles the
// singular Laplacian systems whose right-hand side is consistent; the iterates are
// re-projected every step to keep roundoff from reintroducing the constant mode.
// x is the starting guess on entry and the solution on exit.
template <class Op>
PcgReport pcg(Op&& apply, const Eigen::VectorXd& inv_diag, const Eigen::VectorXd& b,
              Eigen::VectorXd& x, double rel_tol, std::int64_t max_iterations,
              bool deflate_mean = false) {
  const Eigen::Index n = b.size();
  PcgReport report;

  Eigen::VectorXd rhs = b;
  if (deflate_mean) {
    remove_mean(rhs);
    remove_mean(x);
  }
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    x.setZero();
    report.converged = true;
    return report;
  }

  Eigen::VectorXd q(n), r(n), z(n), p(n);
  apply(x, q);
  r = rhs - q;
  if (deflate_mean) remove_mean(r);
  z = inv_diag.cwiseProduct(r);
  if (deflate_mean) remove_mean(z);  // keep the preconditioned direction in the subspace
  p = z;
  double rz = r.dot(z);
  double rnorm = r.norm();

  while (rnorm > rel_tol * bnorm && report.iterations < max_iterations) {
    apply(p, q);
    if (deflate_mean) remove_mean(q);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) break;  // lost positive definiteness numerically
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    if (deflate_mean) remove_mean(r);
    z = inv_diag.cwiseProduct(r);
    if (deflate_mean) remove_mean(z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    rnorm = r.norm();
    ++report.iterations;
  }

  report.rel_residual = rnorm / bnorm;
  report.converged = rnorm <= rel_tol * bnorm;
  return report;
}

}  // namespace mod1::detail
