#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mod1/angular.hpp"
#include "mod1/common.hpp"
#include "mod1/grid_graph.hpp"
#include "mod1/rng.hpp"

namespace mod1 {

// Built-in test functions plus user-supplied elevation grids. F1 is a 1-D oscillator,
// Fxy a 2-D bump evaluated on the unit square mapped affinely onto [-2, 2]^2,
// Bandlimited a random trigonometric polynomial: a flat spectrum up to the cutoff
// (the spectrum of a sinc) weighted by standard Gaussian draws, weights rescaled so
// the largest magnitude is 1, then scaled and shifted.
enum class FunctionKind { F1, Fxy, Bandlimited, GridFile };

struct FunctionSpec {
  FunctionKind kind = FunctionKind::F1;

  // Bandlimited parameters; weights order is DC, then (cos, sin) per mode.
  int modes = 16;
  double scale = 3.0;
  double shift = 3.0;
  std::uint64_t seed = 1;
  std::vector<double> weights;

  // GridFile data, already scaled by the caller.
  Eigen::MatrixXd grid_values;
};

inline FunctionSpec make_f1() { return {}; }

inline FunctionSpec make_fxy() {
  FunctionSpec s;
  s.kind = FunctionKind::Fxy;
  return s;
}

inline FunctionSpec make_bandlimited(int modes = 16, double scale = 3.0, double shift = 3.0,
                                     std::uint64_t seed = 1) {
  if (modes < 1) throw std::invalid_argument("bandlimited function needs at least one mode");
  FunctionSpec s;
  s.kind = FunctionKind::Bandlimited;
  s.modes = modes;
  s.scale = scale;
  s.shift = shift;
  s.seed = seed;
  Rng rng(seed);
  s.weights.resize(2 * static_cast<std::size_t>(modes) + 1);
  double top = 0.0;
  for (double& w : s.weights) {
    w = rng.gaussian();
    top = std::max(top, std::abs(w));
  }
  for (double& w : s.weights) w /= top;
  return s;
}

inline FunctionSpec make_grid_function(Eigen::MatrixXd values) {
  FunctionSpec s;
  s.kind = FunctionKind::GridFile;
  s.grid_values = std::move(values);
  return s;
}

inline std::string function_name(const FunctionSpec& spec) {
  switch (spec.kind) {
    case FunctionKind::F1: return "f1";
    case FunctionKind::Fxy: return "fxy";
    case FunctionKind::Bandlimited: return "bandlimited";
    case FunctionKind::GridFile: return "gridfile";
  }
  return "?";
}

inline double eval_f1(double x) {
  const double c = std::cos(kTwoPi * x);
  const double s = std::sin(kTwoPi * x);
  return 4.0 * x * c * c - 2.0 * s * s;
}

inline double eval_f1_derivative(double x) {
  const double c = std::cos(kTwoPi * x);
  const double s4 = std::sin(2.0 * kTwoPi * x);
  return 4.0 * c * c - 8.0 * kPi * x * s4 - 4.0 * kPi * s4;
}

// 6 x exp(-x^2 - y^2) with (u, v) in [0, 1]^2 mapped to (x, y) in [-2, 2]^2.
inline double eval_fxy(double u, double v) {
  const double x = 4.0 * u - 2.0;
  const double y = 4.0 * v - 2.0;
  return 6.0 * x * std::exp(-x * x - y * y);
}

inline double eval_bandlimited(const FunctionSpec& spec, double x) {
  double acc = spec.weights[0];
  for (int j = 1; j <= spec.modes; ++j) {
    acc += spec.weights[2 * j - 1] * std::cos(kTwoPi * j * x);
    acc += spec.weights[2 * j] * std::sin(kTwoPi * j * x);
  }
  return spec.scale * acc + spec.shift;
}

inline double eval_bandlimited_derivative(const FunctionSpec& spec, double x) {
  double acc = 0.0;
  for (int j = 1; j <= spec.modes; ++j) {
    acc -= spec.weights[2 * j - 1] * kTwoPi * j * std::sin(kTwoPi * j * x);
    acc += spec.weights[2 * j] * kTwoPi * j * std::cos(kTwoPi * j * x);
  }
  return spec.scale * acc;
}

// Lipschitz-type smoothness data used by the recovery certificates. Estimated by dense
// sampling of the derivative (100000 points), exact enough for certificate purposes;
// unknown for user grids.
struct HolderConstants {
  double M = 0.0;
  double alpha = 1.0;
  bool known = false;
};

inline HolderConstants holder_constants(const FunctionSpec& spec) {
  constexpr int kSamples = 100000;
  switch (spec.kind) {
    case FunctionKind::F1: {
      static const double cached = [] {
        double top = 0.0;
        for (int i = 0; i <= kSamples; ++i)
          top = std::max(top, std::abs(eval_f1_derivative(static_cast<double>(i) / kSamples)));
        return top;
      }();
      return {cached, 1.0, true};
    }
    case FunctionKind::Fxy: {
      // Gradient of the bump on [-2,2]^2 times the affine map factor 4.
      static const double cached = [] {
        const int side = 317;  // about 1e5 points
        double top = 0.0;
        for (int a = 0; a <= side; ++a)
          for (int b = 0; b <= side; ++b) {
            const double x = -2.0 + 4.0 * a / side;
            const double y = -2.0 + 4.0 * b / side;
            const double e = std::exp(-x * x - y * y);
            const double gx = 6.0 * e * (1.0 - 2.0 * x * x);
            const double gy = -12.0 * x * y * e;
            top = std::max(top, std::hypot(gx, gy));
          }
        return 4.0 * top;
      }();
      return {cached, 1.0, true};
    }
    case FunctionKind::Bandlimited: {
      double top = 0.0;
      for (int i = 0; i <= kSamples; ++i)
        top = std::max(top,
                       std::abs(eval_bandlimited_derivative(spec, static_cast<double>(i) / kSamples)));
      return {top, 1.0, true};
    }
    case FunctionKind::GridFile:
      return {0.0, 1.0, false};
  }
  return {};
}

struct SampledFunction {
  Eigen::VectorXd f;  // clean values at the grid points, lexicographic order
  Mod1Samples r;      // f mod 1
};

inline SampledFunction sample_function(const FunctionSpec& fn, const GridSpec& grid) {
  validate(grid);
  switch (fn.kind) {
    case FunctionKind::F1:
    case FunctionKind::Bandlimited:
      if (grid.d != 1) throw std::invalid_argument(function_name(fn) + " is one dimensional");
      break;
    case FunctionKind::Fxy:
      if (grid.d != 2) throw std::invalid_argument("fxy is two dimensional");
      break;
    case FunctionKind::GridFile:
      if (grid.d != 2) throw std::invalid_argument("grid files are two dimensional");
      if (fn.grid_values.rows() != grid.m || fn.grid_values.cols() != grid.m)
        throw std::invalid_argument("grid file shape does not match the sampling grid");
      break;
  }

  const std::int64_t n = grid.n();
  SampledFunction out;
  out.f.resize(n);
  double x[16];
  for (std::int64_t i = 0; i < n; ++i) {
    grid_point(grid, i, x);
    switch (fn.kind) {
      case FunctionKind::F1: out.f[i] = eval_f1(x[0]); break;
      case FunctionKind::Fxy: out.f[i] = eval_fxy(x[0], x[1]); break;
      case FunctionKind::Bandlimited: out.f[i] = eval_bandlimited(fn, x[0]); break;
      case FunctionKind::GridFile: out.f[i] = fn.grid_values(i / grid.m, i % grid.m); break;
    }
    if (!std::isfinite(out.f[i]))
      throw std::invalid_argument("function value not finite at index " + std::to_string(i + 1));
  }
  out.r.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    out.r[i] = wrap_unit(out.f[i]);
    if (out.r[i] >= 1.0) out.r[i] = 0.0;  // wrap_unit can round up to 1 for tiny negatives
  }
  return out;
}

// y_i is the clean value pushed through the noise channel and wrapped to [0, 1).
// Bounded adds a uniform perturbation on [-gamma, gamma]; BernoulliUniform keeps the
// clean residue except with probability p, where the sample is replaced by a uniform
// draw on [0, 1); Gaussian adds N(0, sigma^2) before wrapping.
struct NoiseModel {
  enum class Kind { Bounded, BernoulliUniform, Gaussian };
  Kind kind = Kind::Bounded;
  double level = 0.0;  // gamma, p, or sigma
};

inline std::string noise_name(const NoiseModel& model) {
  switch (model.kind) {
    case NoiseModel::Kind::Bounded: return "bounded";
    case NoiseModel::Kind::BernoulliUniform: return "bernoulli";
    case NoiseModel::Kind::Gaussian: return "gaussian";
  }
  return "?";
}

inline void validate(const NoiseModel& model) {
  if (!std::isfinite(model.level) || model.level < 0.0)
    throw std::invalid_argument("noise level must be finite and >= 0");
  if (model.kind == NoiseModel::Kind::Bounded && model.level >= 0.5)
    throw std::invalid_argument("bounded perturbation half-width must be < 0.5");
  if (model.kind == NoiseModel::Kind::BernoulliUniform && model.level > 1.0)
    throw std::invalid_argument("replacement probability must be in [0, 1]");
}

inline Mod1Samples apply_noise(const Eigen::VectorXd& f, const NoiseModel& model, Rng& rng) {
  validate(model);
  Mod1Samples y(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    switch (model.kind) {
      case NoiseModel::Kind::Bounded:
        y[i] = wrap_unit(f[i] + rng.uniform(-model.level, model.level));
        break;
      case NoiseModel::Kind::BernoulliUniform:
        if (rng.uniform01() < model.level)
          y[i] = rng.uniform01();
        else
          y[i] = wrap_unit(f[i]);
        break;
      case NoiseModel::Kind::Gaussian:
        y[i] = wrap_unit(f[i] + model.level * rng.gaussian());
        break;
    }
    if (y[i] >= 1.0) y[i] = 0.0;  // wrap_unit can round up to 1 for tiny negatives
  }
  return y;
}

}  // namespace mod1
