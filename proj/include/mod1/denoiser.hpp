#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mod1/angular.hpp"
#include "mod1/common.hpp"
#include "mod1/grid_graph.hpp"
#include "mod1/manifold.hpp"
#include "mod1/trs.hpp"

namespace mod1 {

enum class Method { Trs, Phases, BurerMonteiro };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Trs: return "trs";
    case Method::Phases: return "phases";
    case Method::BurerMonteiro: return "bm";
  }
  return "?";
}

struct DenoiseConfig {
  double lambda = 0.1;
  int k = 2;
  Method method = Method::Trs;
  int iterations = 1;  // > 1 re-embeds the projected output and solves again
  double tol = 1e-9;   // sphere relaxation tolerance
  SolverOptions manifold;
};

struct DenoiseIterationInfo {
  double objective = 0.0;
  double mu_star = 0.0;                           // sphere relaxation only
  TrsCase case_tag = TrsCase::EasyNotPerp;        // sphere relaxation only
  int inner_iterations = 0;
};

struct DenoiseResult {
  Mod1Samples r_hat;
  Eigen::VectorXd gbar;  // stacked pre-projection iterate of the last pass
  std::vector<DenoiseIterationInfo> passes;
};

// One smoothing pass per iteration: embed the current residues, minimize the
// regularized misfit with the chosen solver, project back to [0, 1). Re-embedding the
// projection and solving again (iterations > 1) keeps lambda and k fixed.
inline DenoiseResult denoise(const Mod1Samples& y, const NeighborGraph& graph,
                             const SparseLaplacian& laplacian, const DenoiseConfig& cfg) {
  if (y.size() != graph.spec.n()) throw std::invalid_argument("sample count does not match grid");
  validate_mod1(y);
  if (cfg.iterations < 1) throw std::invalid_argument("need at least one smoothing pass");
  if (!(cfg.lambda >= 0.0)) throw std::invalid_argument("smoothing weight must be >= 0");
  if (cfg.k != graph.spec.k) throw std::invalid_argument("config radius does not match graph");

  DenoiseResult result;
  result.r_hat = y;
  for (int pass = 0; pass < cfg.iterations; ++pass) {
    const CircleEmbedding z = embed(result.r_hat);
    DenoiseIterationInfo info;
    switch (cfg.method) {
      case Method::Trs: {
        TrsProblem problem{cfg.lambda, &laplacian, stack(z)};
        const TrsSolution sol = solve_trs(problem, TrsOptions{cfg.tol, 200});
        result.gbar = sol.gbar;
        info.objective = sol.objective;
        info.mu_star = sol.mu_star;
        info.case_tag = sol.case_tag;
        info.inner_iterations = sol.root_iterations;
        result.r_hat = project_to_mod1(unstack(sol.gbar));
        break;
      }
      case Method::Phases: {
        SolverOptions opts = cfg.manifold;
        if (opts.initial_step <= 0.0) opts.initial_step = 1.0 / (4.0 * cfg.lambda * cfg.k + 2.0);
        const PhaseSolution sol = solve_phases(laplacian, cfg.lambda, z, opts, &z);
        result.gbar = stack(sol.g);
        info.objective = sol.info.objective;
        info.inner_iterations = sol.info.iterations;
        result.r_hat = project_to_mod1(sol.g);
        break;
      }
      case Method::BurerMonteiro: {
        SolverOptions opts = cfg.manifold;
        if (opts.initial_step <= 0.0) opts.initial_step = 1.0 / (4.0 * cfg.lambda * cfg.k + 2.0);
        const BmSolution sol = solve_burer_monteiro(laplacian, cfg.lambda, z, opts);
        result.gbar = stack(sol.extracted.g);
        info.objective = sol.extracted.info.objective;
        info.inner_iterations = sol.extracted.info.iterations;
        result.r_hat = project_to_mod1(sol.extracted.g);
        break;
      }
    }
    result.passes.push_back(info);
  }
  return result;
}

inline DenoiseResult denoise(const Mod1Samples& y, const GridSpec& spec,
                             const DenoiseConfig& cfg) {
  GridSpec with_k = spec;
  with_k.k = cfg.k;
  const NeighborGraph graph = build_graph(with_k);
  const SparseLaplacian laplacian = build_laplacian(graph);
  return denoise(y, graph, laplacian, cfg);
}

}  // namespace mod1
