#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "mod1/common.hpp"

namespace mod1 {

// Regular grid {0, 1/(m-1), ..., 1}^d with n = m^d vertices, flattened
// lexicographically (last axis fastest, so d = 2 is row-major). Vertices i and j are
// adjacent iff 0 < ||coords(i) - coords(j)||_inf <= k.
struct GridSpec {
  int d = 1;
  std::int64_t m = 2;  // points per axis
  int k = 1;           // neighborhood radius in the max norm

  std::int64_t n() const {
    std::int64_t r = 1;
    for (int t = 0; t < d; ++t) {
      if (r > std::numeric_limits<std::int32_t>::max() / m)
        throw std::invalid_argument("grid size m^d overflows the vertex index type");
      r *= m;
    }
    return r;
  }
};

inline void validate(const GridSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("grid dimension must be >= 1");
  if (spec.m < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  if (spec.k < 1) throw std::invalid_argument("neighborhood radius must be >= 1");
  if (spec.k >= spec.m)
    throw std::invalid_argument("neighborhood radius must be smaller than points per axis");
  (void)spec.n();  // overflow check
}

inline void unflatten(const GridSpec& spec, std::int64_t flat, std::int64_t* coords) {
  for (int t = spec.d - 1; t >= 0; --t) {
    coords[t] = flat % spec.m;
    flat /= spec.m;
  }
}

// Coordinates of vertex `flat` in the unit cube.
inline void grid_point(const GridSpec& spec, std::int64_t flat, double* x) {
  std::int64_t c[16];
  unflatten(spec, flat, c);
  for (int t = 0; t < spec.d; ++t) x[t] = static_cast<double>(c[t]) / static_cast<double>(spec.m - 1);
}

struct Edge {
  std::int32_t i;
  std::int32_t j;  // i < j always
};

struct NeighborGraph {
  GridSpec spec;
  std::vector<Edge> edges;  // sorted lexicographically by (i, j)
  std::vector<std::int32_t> degree;
};

inline NeighborGraph build_graph(const GridSpec& spec) {
  validate(spec);
  if (spec.d > 16) throw std::invalid_argument("grid dimension must be <= 16");
  const std::int64_t n = spec.n();
  const std::int64_t m = spec.m;

  // Offsets with positive flat displacement, sorted by displacement. A neighbor's flat
  // index is i + delta, so emitting these per vertex yields each edge once (i < j) and
  // the whole list comes out lexicographically sorted for free.
  struct Offset {
    std::int64_t delta;
    std::array<std::int64_t, 16> o;
  };
  std::vector<Offset> offsets;
  {
    std::array<std::int64_t, 16> o{};
    for (int t = 0; t < spec.d; ++t) o[t] = -spec.k;
    std::vector<std::int64_t> stride(spec.d, 1);
    for (int t = spec.d - 2; t >= 0; --t) stride[t] = stride[t + 1] * m;
    while (true) {
      std::int64_t delta = 0;
      bool zero = true;
      for (int t = 0; t < spec.d; ++t) {
        delta += o[t] * stride[t];
        if (o[t] != 0) zero = false;
      }
      if (!zero && delta > 0) offsets.push_back({delta, o});
      int t = spec.d - 1;
      while (t >= 0 && o[t] == spec.k) o[t--] = -spec.k;
      if (t < 0) break;
      ++o[t];
    }
    std::sort(offsets.begin(), offsets.end(),
              [](const Offset& a, const Offset& b) { return a.delta < b.delta; });
  }

  NeighborGraph graph;
  graph.spec = spec;
  graph.degree.assign(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> c(spec.d);
  for (std::int64_t i = 0; i < n; ++i) {
    unflatten(spec, i, c.data());
    for (const Offset& off : offsets) {
      bool ok = true;
      for (int t = 0; t < spec.d; ++t) {
        const std::int64_t ct = c[t] + off.o[t];
        if (ct < 0 || ct >= m) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      const std::int64_t j = i + off.delta;
      graph.edges.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
      ++graph.degree[static_cast<std::size_t>(i)];
      ++graph.degree[static_cast<std::size_t>(j)];
    }
  }
  return graph;
}

// Unnormalized graph Laplacian: L_ii = deg(i), L_ij = -1 on edges.
struct SparseLaplacian {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd degree;
  std::int64_t n() const { return matrix.rows(); }
};

inline SparseLaplacian build_laplacian(const NeighborGraph& graph) {
  const std::int64_t n = graph.spec.n();
  SparseLaplacian lap;
  lap.degree.resize(n);
  for (std::int64_t i = 0; i < n; ++i) lap.degree[i] = graph.degree[static_cast<std::size_t>(i)];

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(graph.edges.size() * 2 + static_cast<std::size_t>(n));
  for (const Edge& e : graph.edges) {
    trips.emplace_back(e.i, e.j, -1.0);
    trips.emplace_back(e.j, e.i, -1.0);
  }
  for (std::int64_t i = 0; i < n; ++i)
    trips.emplace_back(static_cast<std::int32_t>(i), static_cast<std::int32_t>(i), lap.degree[i]);
  lap.matrix.resize(n, n);
  lap.matrix.setFromTriplets(trips.begin(), trips.end());
  lap.matrix.makeCompressed();
  return lap;
}

// x^* L x accumulated over the edge list: sum over edges of |x_i - x_j|^2.
inline double laplacian_quadform(const NeighborGraph& graph, const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (const Edge& e : graph.edges) {
    const double diff = x[e.i] - x[e.j];
    acc += diff * diff;
  }
  return acc;
}

inline double laplacian_quadform(const NeighborGraph& graph, const Eigen::VectorXcd& x) {
  double acc = 0.0;
  for (const Edge& e : graph.edges) acc += std::norm(x[e.i] - x[e.j]);
  return acc;
}

struct SpectralBounds {
  double lambda_max_upper;  // Gershgorin bound 2((2k+1)^d - 1); equals 4k when d = 1
  double fiedler_lower;     // 4 kappa sin^2(pi/(2n)) with kappa = (k+1)^d - 1 (= k when d = 1)
};

inline SpectralBounds spectral_bounds(const GridSpec& spec) {
  validate(spec);
  const double n = static_cast<double>(spec.n());
  double box = 1.0, inner = 1.0;
  for (int t = 0; t < spec.d; ++t) {
    box *= 2.0 * spec.k + 1.0;
    inner *= spec.k + 1.0;
  }
  const double pi = 3.14159265358979323846;
  const double s = std::sin(pi / (2.0 * n));
  return {2.0 * (box - 1.0), 4.0 * (inner - 1.0) * s * s};
}

}  // namespace mod1
