#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "mod1/denoiser.hpp"
#include "mod1/eval.hpp"
#include "mod1/io.hpp"
#include "mod1/noise.hpp"
#include "mod1/unwrap.hpp"

namespace mod1 {

// Cartesian sweep over (k, lambda, noise level, method) x seeds. Every trial is a
// pure function of the plan and its trial index: noise realizations are keyed by
// (level index, seed index) so that all k / lambda / method combinations see the same
// corrupted samples, which pairs the comparisons the way repeated-measures sweeps
// expect. Parallel execution assigns whole trials to workers and writes into a
// pre-sized vector, so the output is identical for any worker count.
struct ExperimentPlan {
  FunctionSpec function = make_f1();
  GridSpec grid{1, 500, 2};  // k is overridden by each trial
  NoiseModel::Kind noise_kind = NoiseModel::Kind::Gaussian;
  std::vector<double> levels = {0.05, 0.1};
  std::vector<int> k_list = {2};
  std::vector<double> lambda_list = {0.1};
  std::vector<Method> methods = {Method::Trs};
  int seeds = 20;
  std::uint64_t master_seed = 0;
  double epsilon = 0.05;  // slack parameter of the probabilistic certificates
  double zeta = 0.5;
  int iterations = 1;
  int bm_rank = 3;
};

struct TrialRecord {
  std::string function;
  int d = 1;
  int m = 0;
  std::int64_t n = 0;
  int k = 2;
  std::string noise;
  double level = 0.0;
  double lambda = 0.1;
  std::string method;
  int iterations = 1;
  int seed = 0;
  std::string rng;
  double wrap_rmse_mod1 = 0.0;
  double rmse_f_raw = 0.0;
  double rmse_f_after_shift = 0.0;
  double shift = 0.0;
  double correlation = 0.0;
  double delta = 0.0;
  std::string bound_kind;
  double bound_value = std::numeric_limits<double>::quiet_NaN();
  bool bound_admissible = false;
  bool bound_holds = false;
  std::string trs_case;
  double mu_star = 0.0;
  int solver_iterations = 0;
  std::int64_t wall_time_ms = 0;
};

namespace detail {

inline std::string case_name(TrsCase c) {
  switch (c) {
    case TrsCase::EasyNotPerp: return "easy";
    case TrsCase::PerpInterior: return "perp_interior";
    case TrsCase::HardCase: return "hard";
  }
  return "?";
}

inline int thread_cap() {
  const char* env = std::getenv("MOD1_THREADS");
  if (env == nullptr) return 1 << 20;
  const int cap = std::atoi(env);
  return cap >= 1 ? cap : 1;
}

}  // namespace detail

inline std::vector<TrialRecord> run_experiment(const ExperimentPlan& plan, int parallel = 1,
                                               bool timing = false) {
  if (plan.seeds < 1) throw std::invalid_argument("need at least one seed");
  if (plan.levels.empty() || plan.k_list.empty() || plan.lambda_list.empty() ||
      plan.methods.empty())
    throw std::invalid_argument("sweep lists must be nonempty");
  validate(plan.grid);

  // Shared read-only precomputation, all of it sequential and independent of the
  // worker count: clean samples, per-(level, seed) noise realizations, per-k graphs.
  const SampledFunction clean = sample_function(plan.function, plan.grid);
  const CircleEmbedding h = embed(clean.r);
  const Eigen::VectorXd f_centered =
      clean.f - Eigen::VectorXd::Constant(clean.f.size(), clean.f.mean());
  const HolderConstants holder = holder_constants(plan.function);

  const std::size_t n_levels = plan.levels.size();
  const std::size_t n_seeds = static_cast<std::size_t>(plan.seeds);
  std::vector<Mod1Samples> noisy(n_levels * n_seeds);
  std::vector<std::uint64_t> trial_seed(n_levels * n_seeds);
  for (std::size_t vi = 0; vi < n_levels; ++vi) {
    NoiseModel model{plan.noise_kind, plan.levels[vi]};
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const std::uint64_t id = (static_cast<std::uint64_t>(vi) << 32) | si;
      Rng rng = Rng::stream(plan.master_seed, id);
      noisy[vi * n_seeds + si] = apply_noise(clean.f, model, rng);
      trial_seed[vi * n_seeds + si] = rng.next_u64();
    }
  }

  struct PerK {
    NeighborGraph graph;
    SparseLaplacian laplacian;
  };
  std::vector<PerK> per_k;
  per_k.reserve(plan.k_list.size());
  for (int k : plan.k_list) {
    GridSpec spec = plan.grid;
    spec.k = k;
    validate(spec);
    NeighborGraph graph = build_graph(spec);
    SparseLaplacian laplacian = build_laplacian(graph);
    per_k.push_back({std::move(graph), std::move(laplacian)});
  }

  const std::size_t total = plan.k_list.size() * plan.lambda_list.size() * n_levels *
                            plan.methods.size() * n_seeds;
  std::vector<TrialRecord> records(total);

  NoiseModel name_model{plan.noise_kind, 0.0};
  const std::string noise_label = noise_name(name_model);
  const std::string fn_label = function_name(plan.function);

  auto run_trial = [&](std::size_t index) {
    std::size_t rest = index;
    const std::size_t si = rest % n_seeds;
    rest /= n_seeds;
    const std::size_t mi = rest % plan.methods.size();
    rest /= plan.methods.size();
    const std::size_t vi = rest % n_levels;
    rest /= n_levels;
    const std::size_t li = rest % plan.lambda_list.size();
    const std::size_t ki = rest / plan.lambda_list.size();

    const auto start = std::chrono::steady_clock::now();

    TrialRecord rec;
    rec.function = fn_label;
    rec.d = plan.grid.d;
    rec.m = plan.grid.m;
    rec.n = plan.grid.n();
    rec.k = plan.k_list[ki];
    rec.noise = noise_label;
    rec.level = plan.levels[vi];
    rec.lambda = plan.lambda_list[li];
    rec.method = method_name(plan.methods[mi]);
    rec.iterations = plan.iterations;
    rec.seed = static_cast<int>(si);
    rec.rng = Rng::kAlgorithm;

    const Mod1Samples& y = noisy[vi * n_seeds + si];
    const PerK& gk = per_k[ki];

    DenoiseConfig cfg;
    cfg.lambda = rec.lambda;
    cfg.k = rec.k;
    cfg.method = plan.methods[mi];
    cfg.iterations = plan.iterations;
    cfg.manifold.rank = plan.bm_rank;
    cfg.manifold.seed = trial_seed[vi * n_seeds + si];
    const DenoiseResult den = denoise(y, gk.graph, gk.laplacian, cfg);

    const Eigen::VectorXd f_hat = ols_unwrap(gk.graph, den.r_hat, plan.zeta, 1e-10,
                                             &gk.laplacian);
    rec.wrap_rmse_mod1 = wrap_rmse(den.r_hat, clean.r);
    rec.rmse_f_raw = rmse(clean.f, f_hat);
    rec.shift = mod_out_shift(clean.f, f_hat);
    rec.rmse_f_after_shift = shifted_rmse(clean.f, f_hat, rec.shift);
    rec.correlation = correlation(h, den.gbar);
    rec.delta = realized_delta(embed(y), h);

    const DenoiseIterationInfo& last = den.passes.back();
    rec.solver_iterations = last.inner_iterations;
    if (plan.methods[mi] == Method::Trs) {
      rec.trs_case = detail::case_name(last.case_tag);
      rec.mu_star = last.mu_star;
      if (rec.d == 1 && rec.lambda < 1.0 / (4.0 * rec.k) && last.case_tag == TrsCase::HardCase)
        throw numerical_error("degenerate case reported at lambda " + std::to_string(rec.lambda) +
                              ", k " + std::to_string(rec.k) +
                              ", which the spectrum rules out for lambda < 1/(4k)");
    }

    if (holder.known) {
      BoundInputs in;
      in.lambda = rec.lambda;
      in.k = rec.k;
      in.n = rec.n;
      in.d = rec.d;
      in.M = holder.M;
      in.alpha = holder.alpha;
      in.delta = rec.delta;
      in.epsilon = plan.epsilon;
      in.correlation = rec.correlation;
      BoundKind kind;
      bool have = true;
      switch (plan.noise_kind) {
        case NoiseModel::Kind::Bounded:
          kind = rec.d == 1 ? BoundKind::BoundedNoise : BoundKind::BoundedMultivariate;
          break;
        case NoiseModel::Kind::BernoulliUniform:
          kind = BoundKind::BernoulliOutliers;
          in.p = rec.level;
          have = rec.d == 1;
          break;
        case NoiseModel::Kind::Gaussian:
          kind = BoundKind::GaussianNoise;
          in.sigma = rec.level;
          have = rec.d == 1;
          break;
      }
      if (have) {
        const BoundReport report = check_bound(kind, in);
        rec.bound_kind = bound_name(kind);
        rec.bound_value = report.value;
        rec.bound_admissible = report.admissible;
        rec.bound_holds = report.holds;
        const bool deterministic_kind =
            kind == BoundKind::BoundedNoise || kind == BoundKind::BoundedMultivariate;
        if (deterministic_kind && report.admissible && !report.holds &&
            plan.methods[mi] == Method::Trs && plan.iterations == 1)
          throw numerical_error("alignment certificate violated: correlation " +
                                std::to_string(rec.correlation) + " below guaranteed " +
                                std::to_string(report.value));
      } else {
        rec.bound_kind = "none";
      }
    } else {
      rec.bound_kind = "none";
    }

    if (timing) {
      const auto stop = std::chrono::steady_clock::now();
      rec.wall_time_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
    }
    records[index] = std::move(rec);
  };

  int workers = parallel < 1 ? 1 : parallel;
  workers = std::min(workers, detail::thread_cap());
  workers = std::min<int>(workers, static_cast<int>(total));
  if (workers <= 1) {
    for (std::size_t i = 0; i < total; ++i) run_trial(i);
    return records;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= total) return;
        try {
          run_trial(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

inline std::string render_csv(const std::vector<TrialRecord>& records) {
  std::string out =
      "function,d,m,n,k,noise,level,lambda,method,iterations,seed,rng,"
      "wrap_rmse_mod1,rmse_f_raw,rmse_f_after_shift,shift,correlation,delta,"
      "bound_kind,bound_value,bound_admissible,bound_holds,trs_case,mu_star,"
      "solver_iterations,wall_time_ms\n";
  for (const TrialRecord& r : records) {
    out += r.function;
    out += ',' + std::to_string(r.d);
    out += ',' + std::to_string(r.m);
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.k);
    out += ',' + r.noise;
    out += ',' + format_real(r.level);
    out += ',' + format_real(r.lambda);
    out += ',' + r.method;
    out += ',' + std::to_string(r.iterations);
    out += ',' + std::to_string(r.seed);
    out += ',' + r.rng;
    out += ',' + format_real(r.wrap_rmse_mod1);
    out += ',' + format_real(r.rmse_f_raw);
    out += ',' + format_real(r.rmse_f_after_shift);
    out += ',' + format_real(r.shift);
    out += ',' + format_real(r.correlation);
    out += ',' + format_real(r.delta);
    out += ',' + r.bound_kind;
    out += ',' + format_real(r.bound_value);
    out += ',' + std::string(r.bound_admissible ? "1" : "0");
    out += ',' + std::string(r.bound_holds ? "1" : "0");
    out += ',' + r.trs_case;
    out += ',' + format_real(r.mu_star);
    out += ',' + std::to_string(r.solver_iterations);
    out += ',' + std::to_string(r.wall_time_ms);
    out += '\n';
  }
  return out;
}

namespace detail {

inline double quantile(std::vector<double> x, double p) {
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= x.size()) return x.back();
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[lo + 1] - x[lo]);
}

}  // namespace detail

// Per-configuration medians and interquartile ranges over seeds, in first-appearance
// order of the configurations.
inline std::string render_summary(const std::vector<TrialRecord>& records) {
  struct Group {
    std::string prefix;
    std::vector<double> wrap;
    std::vector<double> shifted;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (const TrialRecord& r : records) {
    std::string key = r.function + ',' + r.noise + ',' + format_real(r.level) + ',' +
                      std::to_string(r.k) + ',' + format_real(r.lambda) + ',' + r.method + ',' +
                      std::to_string(r.iterations);
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({std::move(key), {}, {}});
    Group& g = groups[it->second];
    g.wrap.push_back(r.wrap_rmse_mod1);
    g.shifted.push_back(r.rmse_f_after_shift);
  }
  std::string out =
      "function,noise,level,k,lambda,method,iterations,trials,"
      "median_wrap_rmse_mod1,iqr_wrap_rmse_mod1,"
      "median_rmse_f_after_shift,iqr_rmse_f_after_shift\n";
  for (const Group& g : groups) {
    out += g.prefix;
    out += ',' + std::to_string(g.wrap.size());
    out += ',' + format_real(detail::quantile(g.wrap, 0.5));
    out += ',' + format_real(detail::quantile(g.wrap, 0.75) - detail::quantile(g.wrap, 0.25));
    out += ',' + format_real(detail::quantile(g.shifted, 0.5));
    out +=
        ',' + format_real(detail::quantile(g.shifted, 0.75) - detail::quantile(g.shifted, 0.25));
    out += '\n';
  }
  return out;
}

}  // namespace mod1
