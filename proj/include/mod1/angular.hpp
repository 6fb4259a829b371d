#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>

#include "mod1/common.hpp"

namespace mod1 {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Residues live in [0, 1); points on the unit circle are their angular embedding
// exp(2 pi i r). The stacked form [Re; Im] in R^{2n} is what the relaxed solver works on.
using Mod1Samples = Eigen::VectorXd;
using CircleEmbedding = Eigen::VectorXcd;

inline double wrap_unit(double t) { return t - std::floor(t); }

inline void validate_mod1(const Mod1Samples& r) {
  for (Eigen::Index i = 0; i < r.size(); ++i)
    if (!(r[i] >= 0.0 && r[i] < 1.0))
      throw std::invalid_argument("residue out of [0,1) at index " + std::to_string(i + 1));
}

inline CircleEmbedding embed(const Mod1Samples& r) {
  CircleEmbedding z(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i)
    z[i] = std::complex<double>(std::cos(kTwoPi * r[i]), std::sin(kTwoPi * r[i]));
  return z;
}

inline Eigen::VectorXd stack(const CircleEmbedding& z) {
  const Eigen::Index n = z.size();
  Eigen::VectorXd s(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s[i] = z[i].real();
    s[n + i] = z[i].imag();
  }
  return s;
}

inline CircleEmbedding unstack(const Eigen::VectorXd& s) {
  if (s.size() % 2 != 0) throw std::invalid_argument("stacked vector must have even length");
  const Eigen::Index n = s.size() / 2;
  CircleEmbedding z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = std::complex<double>(s[i], s[n + i]);
  return z;
}

// Argument of each entry mapped to [0, 1). The input need not be normalized but a zero
// entry has no direction to project.
inline Mod1Samples project_to_mod1(const CircleEmbedding& g) {
  Mod1Samples r(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g[i] == std::complex<double>(0.0, 0.0))
      throw std::invalid_argument("cannot project zero modulus entry at index " +
                                  std::to_string(i + 1));
    double t = std::atan2(g[i].imag(), g[i].real()) / kTwoPi;
    if (t < 0.0) t += 1.0;
    if (t >= 1.0) t = 0.0;  // atan2 rounding right at the branch cut
    r[i] = t;
  }
  return r;
}

// Distance on the circle of circumference 1.
inline double wrap_distance(double t1, double t2) {
  const double a = std::abs(t1 - t2);
  return std::min(a, 1.0 - a);
}

// If |g - h| <= eps < 1/2 pointwise on the unit circle, the projected residues are
// within asin(eps / (1 - eps)) / pi in wrap distance.
inline double wrap_distance_bound(double eps) {
  if (!(eps >= 0.0 && eps < 0.5))
    throw std::invalid_argument("pointwise circle distance bound needs eps in [0, 1/2)");
  return std::asin(eps / (1.0 - eps)) / kPi;
}

}  // namespace mod1
