#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "mod1/denoiser.hpp"
#include "mod1/eval.hpp"
#include "mod1/experiment.hpp"
#include "mod1/io.hpp"
#include "mod1/noise.hpp"
#include "mod1/unwrap.hpp"

namespace {

using namespace mod1;

// Shared function-selection flags for simulate and experiment.
struct FunctionFlags {
  std::string function = "f1";
  int modes = 16;
  double scale = 3.0;
  double shift = 3.0;
  std::uint64_t fn_seed = 1;
  std::string grid_path;
  double grid_scale = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--function", function, "f1, fxy, bandlimited, or gridfile")
        ->check(CLI::IsMember({"f1", "fxy", "bandlimited", "gridfile"}));
    cmd->add_option("--modes", modes, "Fourier modes of the bandlimited generator");
    cmd->add_option("--scale", scale, "bandlimited amplitude factor");
    cmd->add_option("--shift", shift, "bandlimited additive offset");
    cmd->add_option("--fn-seed", fn_seed, "bandlimited weight seed");
    cmd->add_option("--grid-path", grid_path, "elevation grid file for gridfile");
    cmd->add_option("--grid-scale", grid_scale, "factor applied to grid file values");
  }

  FunctionSpec build() const {
    if (function == "f1") return make_f1();
    if (function == "fxy") return make_fxy();
    if (function == "bandlimited") return make_bandlimited(modes, scale, shift, fn_seed);
    if (grid_path.empty())
      throw CLI::ValidationError("--grid-path", "gridfile needs an input path");
    std::ifstream in(grid_path);
    if (!in) throw mod1::io_error("cannot open " + grid_path);
    Eigen::MatrixXd values = read_grid_matrix(in);
    return make_grid_function(values * grid_scale);
  }

  int dimension() const { return function == "fxy" || function == "gridfile" ? 2 : 1; }
};

NoiseModel::Kind parse_noise(const std::string& name) {
  if (name == "bounded") return NoiseModel::Kind::Bounded;
  if (name == "bernoulli") return NoiseModel::Kind::BernoulliUniform;
  return NoiseModel::Kind::Gaussian;
}

Method parse_method(const std::string& name) {
  if (name == "trs") return Method::Trs;
  if (name == "phases") return Method::Phases;
  return Method::BurerMonteiro;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw mod1::io_error("cannot write " + path);
  return os;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os = open_out(path);
  os << content;
}

GridSpec make_grid(int d, std::int64_t n, std::int64_t m, int k) {
  GridSpec spec;
  spec.d = d;
  spec.k = k;
  if (m > 0) {
    spec.m = m;
  } else if (n > 0) {
    if (d != 1)
      throw CLI::ValidationError("--n", "use --m to size each axis when d > 1");
    spec.m = n;
  } else {
    spec.m = d == 1 ? 500 : 122;
  }
  validate(spec);
  return spec;
}

int cmd_simulate(const FunctionFlags& fn, std::int64_t n, std::int64_t m,
                 const std::string& noise, double gamma, double p, double sigma,
                 std::uint64_t seed, bool blind, const std::string& out) {
  const FunctionSpec spec = fn.build();
  const GridSpec grid = make_grid(fn.dimension(), n, m, 1);
  const SampledFunction sampled = sample_function(spec, grid);

  NoiseModel model{parse_noise(noise), 0.0};
  switch (model.kind) {
    case NoiseModel::Kind::Bounded: model.level = gamma; break;
    case NoiseModel::Kind::BernoulliUniform: model.level = p; break;
    case NoiseModel::Kind::Gaussian: model.level = sigma; break;
  }
  Rng rng(seed);
  const Mod1Samples y = apply_noise(sampled.f, model, rng);

  std::ostringstream os;
  write_samples_csv(os, grid, y, blind ? nullptr : &sampled.f);
  emit(out, os.str());
  return 0;
}

int cmd_denoise(const std::string& in_path, const std::string& out, const std::string& method,
                double lambda, int k, int iterations, int rank, std::uint64_t seed) {
  std::ifstream in(in_path);
  if (!in) throw mod1::io_error("cannot open " + in_path);
  const SamplesFile samples = read_samples_csv(in);

  GridSpec grid{samples.d, samples.m, k};
  validate(grid);
  DenoiseConfig cfg;
  cfg.lambda = lambda;
  cfg.k = k;
  cfg.method = parse_method(method);
  cfg.iterations = iterations;
  cfg.manifold.rank = rank;
  cfg.manifold.seed = seed;
  const DenoiseResult result = denoise(samples.y, grid, cfg);

  std::ostringstream os;
  write_series_csv(os, "r_hat", result.r_hat);
  emit(out, os.str());
  return 0;
}

// Residues come either from a denoised series (index,r_hat) or straight from a
// samples file; the first header token decides which.
Mod1Samples load_residues(const std::string& path, int& d, std::int64_t& m) {
  std::ifstream probe(path);
  if (!probe) throw mod1::io_error("cannot open " + path);
  std::string header;
  std::getline(probe, header);
  probe.seekg(0);
  if (header.rfind("index,r_hat", 0) == 0) {
    Eigen::VectorXd r = read_series_csv(probe, "r_hat");
    validate_mod1(r);
    if (m <= 0) {
      if (d == 1) {
        m = r.size();
      } else {
        m = static_cast<std::int64_t>(
            std::llround(std::pow(static_cast<double>(r.size()), 1.0 / d)));
      }
    }
    return r;
  }
  const SamplesFile samples = read_samples_csv(probe);
  d = samples.d;
  m = samples.m;
  return samples.y;
}

int cmd_unwrap(const std::string& in_path, const std::string& out, const std::string& method,
               double zeta, int k, int d, std::int64_t m) {
  Mod1Samples r = load_residues(in_path, d, m);
  if (method == "qt" && d != 1) {
    std::cerr << "quotient tracker requires d=1\n";
    return 1;
  }
  GridSpec grid{d, m, k};
  validate(grid);
  if (grid.n() != r.size())
    throw mod1::io_error("grid holds " + std::to_string(grid.n()) + " points but input has " +
                         std::to_string(r.size()));

  Eigen::VectorXd f_hat;
  if (method == "qt") {
    f_hat = quotient_tracker(grid, r, zeta);
  } else {
    const NeighborGraph graph = build_graph(grid);
    f_hat = ols_unwrap(graph, r, zeta);
  }
  std::ostringstream os;
  write_series_csv(os, "f_hat", f_hat);
  emit(out, os.str());
  return 0;
}

int cmd_evaluate(const std::string& in_path, const std::string& r_hat_path,
                 const std::string& f_hat_path, const std::string& out) {
  std::ifstream in(in_path);
  if (!in) throw mod1::io_error("cannot open " + in_path);
  const SamplesFile samples = read_samples_csv(in);
  if (!samples.has_clean)
    throw mod1::io_error("evaluation needs the clean_f column in " + in_path);
  Mod1Samples clean_r(samples.clean_f.size());
  for (Eigen::Index i = 0; i < clean_r.size(); ++i) clean_r[i] = wrap_unit(samples.clean_f[i]);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double wrap = nan, raw = nan, shifted = nan, shift = nan;
  if (!r_hat_path.empty()) {
    std::ifstream rs(r_hat_path);
    if (!rs) throw mod1::io_error("cannot open " + r_hat_path);
    const Eigen::VectorXd r_hat = read_series_csv(rs, "r_hat");
    if (r_hat.size() != samples.y.size())
      throw mod1::io_error("denoised series length does not match samples");
    wrap = wrap_rmse(r_hat, clean_r);
  }
  if (!f_hat_path.empty()) {
    std::ifstream fs(f_hat_path);
    if (!fs) throw mod1::io_error("cannot open " + f_hat_path);
    const Eigen::VectorXd f_hat = read_series_csv(fs, "f_hat");
    if (f_hat.size() != samples.y.size())
      throw mod1::io_error("unwrapped series length does not match samples");
    raw = rmse(samples.clean_f, f_hat);
    shift = mod_out_shift(samples.clean_f, f_hat);
    shifted = shifted_rmse(samples.clean_f, f_hat, shift);
  }

  std::string csv = "wrap_rmse_mod1,rmse_f_raw,rmse_f_after_shift,shift\n";
  csv += format_real(wrap) + ',' + format_real(raw) + ',' + format_real(shifted) + ',' +
         format_real(shift) + '\n';
  emit(out, csv);
  return 0;
}

int cmd_experiment(const FunctionFlags& fn, std::int64_t n, std::int64_t m,
                   const std::string& noise, const std::vector<double>& levels,
                   const std::vector<int>& k_list, const std::vector<double>& lambda_list,
                   const std::vector<std::string>& methods, int seeds,
                   std::uint64_t master_seed, double epsilon, double zeta, int iterations,
                   int rank, int parallel, bool timing, const std::string& out,
                   const std::string& summary) {
  ExperimentPlan plan;
  plan.function = fn.build();
  plan.grid = make_grid(fn.dimension(), n, m, 1);
  plan.noise_kind = parse_noise(noise);
  plan.levels = levels;
  plan.k_list = k_list;
  plan.lambda_list = lambda_list;
  plan.methods.clear();
  for (const std::string& name : methods) plan.methods.push_back(parse_method(name));
  plan.seeds = seeds;
  plan.master_seed = master_seed;
  plan.epsilon = epsilon;
  plan.zeta = zeta;
  plan.iterations = iterations;
  plan.bm_rank = rank;

  const std::vector<TrialRecord> records = run_experiment(plan, parallel, timing);
  emit(out, render_csv(records));
  if (!summary.empty()) emit(summary, render_summary(records));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoise and unwrap modulo-1 samples of a smooth function"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Sample a test function and corrupt the residues");
  FunctionFlags sim_fn;
  sim_fn.attach(sim);
  std::int64_t sim_n = 0, sim_m = 0;
  std::string sim_noise = "gaussian";
  double sim_gamma = 0.0, sim_p = 0.0, sim_sigma = 0.0;
  std::uint64_t sim_seed = 0;
  bool sim_blind = false;
  std::string sim_out;
  sim->add_option("--n", sim_n, "total samples (d = 1)");
  sim->add_option("--m", sim_m, "samples per axis");
  sim->add_option("--noise", sim_noise, "bounded, bernoulli, or gaussian")
      ->check(CLI::IsMember({"bounded", "bernoulli", "gaussian"}));
  sim->add_option("--gamma", sim_gamma, "bounded noise half-width");
  sim->add_option("--p", sim_p, "bernoulli replacement probability");
  sim->add_option("--sigma", sim_sigma, "gaussian noise level");
  sim->add_option("--seed", sim_seed, "noise seed");
  sim->add_flag("--blind", sim_blind, "omit the clean_f column");
  sim->add_option("--out", sim_out, "output samples CSV, - for stdout");

  // denoise
  auto* den = app.add_subcommand("denoise", "Smooth noisy residues on the grid graph");
  std::string den_in, den_out, den_method = "trs";
  double den_lambda = 0.1;
  int den_k = 2, den_iterations = 1, den_rank = 3;
  std::uint64_t den_seed = 0;
  den->add_option("--in", den_in, "input samples CSV")->required();
  den->add_option("--out", den_out, "output series CSV, - for stdout");
  den->add_option("--method", den_method, "trs, phases, or bm")
      ->check(CLI::IsMember({"trs", "phases", "bm"}));
  den->add_option("--lambda", den_lambda, "smoothing weight");
  den->add_option("--k", den_k, "neighborhood radius");
  den->add_option("--iterations", den_iterations, "denoising passes");
  den->add_option("--rank", den_rank, "factor columns for bm");
  den->add_option("--seed", den_seed, "bm initialization seed");

  // unwrap
  auto* unw = app.add_subcommand("unwrap", "Recover real values from residues");
  std::string unw_in, unw_out, unw_method = "ols";
  double unw_zeta = 0.5;
  int unw_k = 2, unw_d = 1;
  std::int64_t unw_m = 0;
  unw->add_option("--in", unw_in, "denoised series or samples CSV")->required();
  unw->add_option("--out", unw_out, "output series CSV, - for stdout");
  unw->add_option("--method", unw_method, "ols or qt")->check(CLI::IsMember({"ols", "qt"}));
  unw->add_option("--zeta", unw_zeta, "jump threshold");
  unw->add_option("--k", unw_k, "neighborhood radius for ols");
  unw->add_option("--d", unw_d, "grid dimension when the input is a bare series");
  unw->add_option("--m", unw_m, "samples per axis when the input is a bare series");

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Score estimates against clean samples");
  std::string eva_in, eva_r, eva_f, eva_out;
  eva->add_option("--in", eva_in, "samples CSV with clean_f")->required();
  eva->add_option("--r-hat", eva_r, "denoised series to score");
  eva->add_option("--f-hat", eva_f, "unwrapped series to score");
  eva->add_option("--out", eva_out, "metrics CSV, - for stdout");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Sweep configurations and emit tidy CSV");
  FunctionFlags exp_fn;
  exp_fn.attach(exp);
  std::int64_t exp_n = 0, exp_m = 0;
  std::string exp_noise = "gaussian";
  std::vector<double> exp_levels = {0.05, 0.1};
  std::vector<int> exp_k = {2};
  std::vector<double> exp_lambda = {0.1};
  std::vector<std::string> exp_methods = {"trs"};
  int exp_seeds = 20, exp_iterations = 1, exp_rank = 3, exp_parallel = 1;
  std::uint64_t exp_master = 0;
  double exp_epsilon = 0.05, exp_zeta = 0.5;
  bool exp_timing = false;
  std::string exp_out, exp_summary;
  exp->add_option("--n", exp_n, "total samples (d = 1)");
  exp->add_option("--m", exp_m, "samples per axis");
  exp->add_option("--noise", exp_noise, "bounded, bernoulli, or gaussian")
      ->check(CLI::IsMember({"bounded", "bernoulli", "gaussian"}));
  exp->add_option("--levels", exp_levels, "noise levels to sweep")->delimiter(',');
  exp->add_option("--k-list", exp_k, "neighborhood radii to sweep")->delimiter(',');
  exp->add_option("--lambda-list", exp_lambda, "smoothing weights to sweep")->delimiter(',');
  exp->add_option("--methods", exp_methods, "solvers to sweep")
      ->delimiter(',')
      ->check(CLI::IsMember({"trs", "phases", "bm"}));
  exp->add_option("--seeds", exp_seeds, "trials per configuration");
  exp->add_option("--master-seed", exp_master, "seed deriving every trial stream");
  exp->add_option("--epsilon", exp_epsilon, "slack in the probabilistic certificates");
  exp->add_option("--zeta", exp_zeta, "jump threshold for unwrapping");
  exp->add_option("--iterations", exp_iterations, "denoising passes per trial");
  exp->add_option("--rank", exp_rank, "factor columns for bm");
  exp->add_option("--parallel", exp_parallel, "worker threads");
  exp->add_flag("--timing", exp_timing, "record wall times (breaks byte determinism)");
  exp->add_option("--out", exp_out, "trial CSV path, - for stdout");
  exp->add_option("--summary", exp_summary, "also write per-config median and IQR CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_fn, sim_n, sim_m, sim_noise, sim_gamma, sim_p, sim_sigma,
                          sim_seed, sim_blind, sim_out);
    if (den->parsed())
      return cmd_denoise(den_in, den_out, den_method, den_lambda, den_k, den_iterations,
                         den_rank, den_seed);
    if (unw->parsed())
      return cmd_unwrap(unw_in, unw_out, unw_method, unw_zeta, unw_k, unw_d, unw_m);
    if (eva->parsed()) return cmd_evaluate(eva_in, eva_r, eva_f, eva_out);
    if (exp->parsed())
      return cmd_experiment(exp_fn, exp_n, exp_m, exp_noise, exp_levels, exp_k, exp_lambda,
                            exp_methods, exp_seeds, exp_master, exp_epsilon, exp_zeta,
                            exp_iterations, exp_rank, exp_parallel, exp_timing, exp_out,
                            exp_summary);
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const mod1::io_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
