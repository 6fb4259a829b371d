#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mod1/angular.hpp"
#include "mod1/common.hpp"

namespace mod1 {

inline double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument("rmse needs two equal-length nonempty vectors");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

// Root mean square of the wrap distance between residue vectors.
inline double wrap_rmse(const Mod1Samples& a, const Mod1Samples& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument("wrap rmse needs two equal-length nonempty vectors");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = wrap_distance(wrap_unit(a[i]), wrap_unit(b[i]));
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

// Unwrapped estimates are determined only up to a global constant. The constant is
// estimated as the mode of the offsets f_i - fhat_i over a 100-bin histogram spanning
// their range; ties go to the bin whose center is closest to the median offset, then to
// the lower bin index. Returns the center of the winning bin.
inline double mod_out_shift(const Eigen::VectorXd& f_true, const Eigen::VectorXd& f_hat) {
  if (f_true.size() != f_hat.size() || f_true.size() == 0)
    throw std::invalid_argument("shift estimate needs two equal-length nonempty vectors");
  const Eigen::Index n = f_true.size();
  Eigen::VectorXd offsets = f_true - f_hat;
  const double lo = offsets.minCoeff();
  const double hi = offsets.maxCoeff();
  if (lo == hi) return lo;

  constexpr int kBins = 100;
  const double width = (hi - lo) / kBins;
  int counts[kBins] = {0};
  for (Eigen::Index i = 0; i < n; ++i) {
    int bin = static_cast<int>((offsets[i] - lo) / width);
    bin = std::min(bin, kBins - 1);
    ++counts[bin];
  }

  std::vector<double> sorted(offsets.data(), offsets.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  double median = sorted[n / 2];
  if (n % 2 == 0) {
    const double below = *std::max_element(sorted.begin(), sorted.begin() + n / 2);
    median = 0.5 * (median + below);
  }

  int best = 0;
  for (int b = 1; b < kBins; ++b) {
    if (counts[b] > counts[best]) {
      best = b;
    } else if (counts[b] == counts[best]) {
      const double cb = lo + (b + 0.5) * width;
      const double cbest = lo + (best + 0.5) * width;
      if (std::abs(cb - median) < std::abs(cbest - median)) best = b;
    }
  }
  return lo + (best + 0.5) * width;
}

inline double shifted_rmse(const Eigen::VectorXd& f_true, const Eigen::VectorXd& f_hat,
                           double shift) {
  return rmse(f_true, f_hat + Eigen::VectorXd::Constant(f_hat.size(), shift));
}

// Alignment between the clean embedding and a solver iterate in stacked form,
// (1/n) <hbar, gbar>. Equals 1 exactly when gbar is the clean embedding.
inline double correlation(const CircleEmbedding& h, const Eigen::VectorXd& gbar) {
  if (gbar.size() != 2 * h.size()) throw std::invalid_argument("stacked iterate must have length 2n");
  return stack(h).dot(gbar) / static_cast<double>(h.size());
}

// Realized embedding noise ||z - h||_2 / sqrt(n).
inline double realized_delta(const CircleEmbedding& z, const CircleEmbedding& h) {
  if (z.size() != h.size()) throw std::invalid_argument("embeddings must have equal length");
  return (z - h).norm() / std::sqrt(static_cast<double>(h.size()));
}

// A-priori alignment certificates for the sphere relaxation. Each bound states that
// the correlation above is at least `value` whenever the model assumptions hold; the
// deterministic bounded-noise forms use the realized delta, the Bernoulli and Gaussian
// forms hold with high probability and carry a slack parameter epsilon.
enum class BoundKind { BoundedNoise, BernoulliOutliers, GaussianNoise, BoundedMultivariate };

inline std::string bound_name(BoundKind kind) {
  switch (kind) {
    case BoundKind::BoundedNoise: return "bounded";
    case BoundKind::BernoulliOutliers: return "bernoulli";
    case BoundKind::GaussianNoise: return "gaussian";
    case BoundKind::BoundedMultivariate: return "bounded_multivariate";
  }
  return "?";
}

struct BoundInputs {
  double lambda = 0.1;
  int k = 2;
  std::int64_t n = 0;
  int d = 1;
  double M = 0.0;
  double alpha = 1.0;
  double delta = 0.0;    // realized embedding noise, bounded kinds
  double p = 0.0;        // replacement probability, Bernoulli kind
  double sigma = 0.0;    // Gaussian level
  double epsilon = 0.0;  // probabilistic slack
  double correlation = 0.0;
};

struct BoundReport {
  BoundKind kind;
  bool admissible = false;  // assumptions met, value meaningful
  double value = std::numeric_limits<double>::quiet_NaN();
  double correlation = 0.0;
  bool holds = false;
};

// lambda pi^2 M^2 (2k)^(2 alpha + 1) / n^(2 alpha)
inline double smoothness_term(double lambda, int k, double M, double alpha, std::int64_t n) {
  return lambda * kPi * kPi * M * M * std::pow(2.0 * k, 2.0 * alpha + 1.0) /
         std::pow(static_cast<double>(n), 2.0 * alpha);
}

// lambda pi^2 M^2 (2k)^(2 alpha) d^(2 alpha) ((2k+1)^d - 1) / n^(2 alpha / d)
inline double smoothness_term_multi(double lambda, int k, double M, double alpha,
                                    std::int64_t n, int d) {
  const double box = std::pow(2.0 * k + 1.0, d) - 1.0;
  return lambda * kPi * kPi * M * M * std::pow(2.0 * k, 2.0 * alpha) *
         std::pow(static_cast<double>(d), 2.0 * alpha) * box /
         std::pow(static_cast<double>(n), 2.0 * alpha / d);
}

inline BoundReport check_bound(BoundKind kind, const BoundInputs& in) {
  BoundReport report;
  report.kind = kind;
  report.correlation = in.correlation;
  const bool base = in.n >= 2 && in.k >= 1 && in.lambda >= 0.0 && in.M > 0.0 && in.alpha > 0.0;
  const bool lambda_1d = in.lambda < 1.0 / (4.0 * in.k);
  switch (kind) {
    case BoundKind::BoundedNoise:
      report.admissible = base && in.d == 1 && lambda_1d && in.delta >= 0.0 && in.delta <= 1.0;
      if (report.admissible)
        report.value =
            1.0 - 1.5 * in.delta - smoothness_term(in.lambda, in.k, in.M, in.alpha, in.n);
      break;
    case BoundKind::BernoulliOutliers:
      report.admissible = base && in.d == 1 && lambda_1d && in.epsilon > 0.0 &&
                          in.epsilon < 0.5 && in.p >= 0.0 && in.p + in.epsilon <= 0.5;
      if (report.admissible)
        report.value = 1.0 - 3.0 * std::sqrt((in.p + in.epsilon) / 2.0) -
                       smoothness_term(in.lambda, in.k, in.M, in.alpha, in.n);
      break;
    case BoundKind::GaussianNoise: {
      const double keep = (1.0 - in.epsilon) * std::exp(-2.0 * kPi * kPi * in.sigma * in.sigma);
      report.admissible = base && in.d == 1 && lambda_1d && in.epsilon > 0.0 &&
                          in.epsilon < 0.5 && keep >= 0.5;
      if (report.admissible)
        report.value = 1.0 - 3.0 * std::sqrt((1.0 - keep) / 2.0) -
                       smoothness_term(in.lambda, in.k, in.M, in.alpha, in.n);
      break;
    }
    case BoundKind::BoundedMultivariate: {
      const double box = std::pow(2.0 * in.k + 1.0, in.d) - 1.0;
      report.admissible = base && in.d >= 1 && in.lambda < 1.0 / (2.0 * box) &&
                          in.delta >= 0.0 && in.delta <= 1.0;
      if (report.admissible)
        report.value = 1.0 - 1.5 * in.delta -
                       smoothness_term_multi(in.lambda, in.k, in.M, in.alpha, in.n, in.d);
      break;
    }
  }
  report.holds = report.admissible && in.correlation >= report.value - 1e-9;
  return report;
}

}  // namespace mod1
