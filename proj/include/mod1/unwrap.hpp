#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "mod1/angular.hpp"
#include "mod1/common.hpp"
#include "mod1/grid_graph.hpp"
#include "mod1/pcg.hpp"

namespace mod1 {

// Thresholded jump detector. A residue difference beyond the threshold is read as the
// integer part stepping by one. The positive boundary is excluded and the negative one
// included so that a clean ramp whose consecutive residues rise by exactly the
// threshold unwraps upward rather than oscillating; under continuous noise the
// boundary cases have probability zero either way.
inline int sign_zeta(double t, double zeta) {
  if (!(zeta > 0.0)) throw std::invalid_argument("jump threshold must be positive");
  if (t > zeta) return -1;
  if (t <= -zeta) return 1;
  return 0;
}

// Sequential integer-part tracking along a 1-D chain: q_1 = 0 and
// q_{i+1} = q_i + sign_zeta(r_{i+1} - r_i). Returns f_hat = q + r. Only meaningful in
// one dimension where consecutive order exists.
inline Eigen::VectorXd quotient_tracker(const GridSpec& spec, const Mod1Samples& r,
                                        double zeta = 0.5) {
  validate(spec);
  if (spec.d != 1)
    throw std::invalid_argument("sequential quotient tracking needs a 1-D grid");
  if (r.size() != spec.n()) throw std::invalid_argument("residue count does not match grid");
  validate_mod1(r);
  const Eigen::Index n = r.size();
  Eigen::VectorXd f(n);
  double q = 0.0;
  f[0] = r[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    q += sign_zeta(r[i] - r[i - 1], zeta);
    f[i] = q + r[i];
  }
  return f;
}

// Edge difference system for least-squares unwrapping. Every edge {i, j} with i < j
// contributes the equation f_j - f_i = b_e where b_e = sign_zeta(r_j - r_i) + r_j - r_i.
// The incidence rows sum to zero, so the system determines f only up to a constant.
struct UnwrapSystem {
  const NeighborGraph* graph;
  Eigen::VectorXd b;  // one entry per edge, |b| < 1
};

inline UnwrapSystem build_unwrap_system(const NeighborGraph& graph, const Mod1Samples& r,
                                        double zeta = 0.5) {
  if (r.size() != graph.spec.n()) throw std::invalid_argument("residue count does not match grid");
  validate_mod1(r);
  UnwrapSystem sys;
  sys.graph = &graph;
  sys.b.resize(static_cast<Eigen::Index>(graph.edges.size()));
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const double t = r[graph.edges[e].j] - r[graph.edges[e].i];
    sys.b[static_cast<Eigen::Index>(e)] = sign_zeta(t, zeta) + t;
  }
  return sys;
}

// Minimum-norm least-squares unwrapping over the whole graph. The normal equations of
// the edge system are L f = T^T b with the same graph Laplacian, solved by conjugate
// gradients restricted to the mean-zero subspace; the returned f_hat has zero mean.
inline Eigen::VectorXd ols_unwrap(const NeighborGraph& graph, const Mod1Samples& r,
                                  double zeta = 0.5, double rel_tol = 1e-10,
                                  const SparseLaplacian* laplacian = nullptr) {
  const UnwrapSystem sys = build_unwrap_system(graph, r, zeta);
  const std::int64_t n = graph.spec.n();

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Edge& edge = graph.edges[e];
    rhs[edge.j] += sys.b[static_cast<Eigen::Index>(e)];
    rhs[edge.i] -= sys.b[static_cast<Eigen::Index>(e)];
  }

  SparseLaplacian local;
  if (laplacian == nullptr) {
    local = build_laplacian(graph);
    laplacian = &local;
  }
  auto apply = [&](const Eigen::VectorXd& p, Eigen::VectorXd& q) {
    q.noalias() = laplacian->matrix * p;
  };
  const Eigen::VectorXd inv_diag = laplacian->degree.cwiseInverse();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  const detail::PcgReport report = detail::pcg(apply, inv_diag, rhs, f, rel_tol, 20 * n, true);
  if (!report.converged)
    throw numerical_error("unwrapping normal equations stalled at relative residual " +
                          std::to_string(report.rel_residual));
  f.array() -= f.mean();
  return f;
}

}  // namespace mod1
