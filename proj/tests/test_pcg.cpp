#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "mod1/grid_graph.hpp"
#include "mod1/pcg.hpp"
#include "mod1/rng.hpp"

using namespace mod1;

TEST_CASE("pcg solves a dense SPD system to tolerance", "[pcg]") {
  const int n = 40;
  Rng rng(3);
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = rng.gaussian();
  Eigen::MatrixXd A = B * B.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);

  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = rng.gaussian();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();

  auto report = detail::pcg([&](const Eigen::VectorXd& p, Eigen::VectorXd& q) { q = A * p; },
                            inv_diag, b, x, 1e-12, 10000);
  REQUIRE(report.converged);
  Eigen::VectorXd exact = A.ldlt().solve(b);
  CHECK((x - exact).norm() / exact.norm() < 1e-8);
}

TEST_CASE("mean deflation handles consistent singular laplacian systems", "[pcg]") {
  const GridSpec spec{1, 60, 2};
  NeighborGraph g = build_graph(spec);
  SparseLaplacian lap = build_laplacian(g);
  const Eigen::Index n = spec.n();

  Rng rng(8);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = rng.gaussian();
  b.array() -= b.mean();  // consistent right-hand side

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd inv_diag = lap.degree.cwiseInverse();
  auto report =
      detail::pcg([&](const Eigen::VectorXd& p, Eigen::VectorXd& q) { q = lap.matrix * p; },
                  inv_diag, b, x, 1e-11, 20 * n, /*deflate_mean=*/true);
  REQUIRE(report.converged);
  CHECK(std::abs(x.mean()) < 1e-12);
  CHECK((lap.matrix * x - b).norm() / b.norm() < 1e-9);
}

TEST_CASE("zero right-hand side short-circuits", "[pcg]") {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(7);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(7, 3.0);
  Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(7);
  auto report = detail::pcg(
      [&](const Eigen::VectorXd& p, Eigen::VectorXd& q) { q = 2.0 * p; }, inv_diag, b, x, 1e-10,
      100);
  CHECK(report.converged);
  CHECK(report.iterations == 0);
  CHECK(x.norm() == 0.0);
}

TEST_CASE("warm starts cut the iteration count", "[pcg]") {
  const GridSpec spec{1, 200, 1};
  NeighborGraph g = build_graph(spec);
  SparseLaplacian lap = build_laplacian(g);
  const Eigen::Index n = spec.n();
  Eigen::SparseMatrix<double> A = lap.matrix;
  for (Eigen::Index i = 0; i < n; ++i) A.coeffRef(i, i) += 1.0;

  Rng rng(4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b[i] = rng.gaussian();
  Eigen::VectorXd inv_diag = (lap.degree.array() + 1.0).inverse();

  Eigen::VectorXd cold = Eigen::VectorXd::Zero(n);
  auto apply = [&](const Eigen::VectorXd& p, Eigen::VectorXd& q) { q = A * p; };
  auto cold_report = detail::pcg(apply, inv_diag, b, cold, 1e-12, 10000);
  REQUIRE(cold_report.converged);

  Eigen::VectorXd warm = cold;
  auto warm_report = detail::pcg(apply, inv_diag, b, warm, 1e-12, 10000);
  REQUIRE(warm_report.converged);
  CHECK(warm_report.iterations <= 1);
}
