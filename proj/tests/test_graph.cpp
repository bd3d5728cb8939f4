#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mgnn/graph.hpp"
#include "mgnn/manifold.hpp"

using namespace mgnn;

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 / 3.0 * std::numbers::pi));
}

TEST_CASE("two-point kernel weight") {
  Eigen::MatrixXd pts(2, 2);
  pts << 0.0, 0.0, 0.5, 0.0;
  EpsilonGraph g = build_epsilon_graph(pts, 1, 1.0);
  // alpha_1 / ((d+2) N eps^{d+2}) = 2 / (3 * 2 * 1) = 1/3
  CHECK(g.weights.coeff(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(g.weights.coeff(1, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(g.weights.coeff(0, 0) == 0.0);
}

TEST_CASE("kernel cutoff excludes far pairs and includes the boundary") {
  Eigen::MatrixXd far(2, 2);
  far << 0.0, 0.0, 1.2, 0.0;
  CHECK(build_epsilon_graph(far, 1, 1.0).weights.nonZeros() == 0);
  CHECK(build_epsilon_graph(far, 1, 1.0).isolated_nodes == 2);

  Eigen::MatrixXd boundary(2, 2);
  boundary << 0.0, 0.0, 1.0, 0.0;
  CHECK(build_epsilon_graph(boundary, 1, 1.0).weights.nonZeros() == 2);
}

TEST_CASE("epsilon graph matches a brute-force double loop") {
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, 50, 7);
  const double eps = 0.4;
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, eps);

  const int n = sample.n();
  const double w = 2.0 / (3.0 * n * std::pow(eps, 3));
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double dist = (sample.points.row(i) - sample.points.row(j)).norm();
      if (dist <= eps) dense(i, j) = w;
    }
  CHECK((Eigen::MatrixXd(g.weights) - dense).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("laplacian of small graphs") {
  SUBCASE("two nodes") {
    Eigen::SparseMatrix<double> w(2, 2);
    w.insert(0, 1) = 0.7;
    w.insert(1, 0) = 0.7;
    Eigen::MatrixXd lap(graph_laplacian(w));
    Eigen::MatrixXd expect(2, 2);
    expect << 0.7, -0.7, -0.7, 0.7;
    CHECK((lap - expect).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
  SUBCASE("complete triangle spectrum {0, 3w, 3w}") {
    const double wv = 0.25;
    Eigen::SparseMatrix<double> w(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) w.insert(i, j) = wv;
    SpectralDecomposition dec = eigendecompose(graph_laplacian(w), 3);
    CHECK(dec.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dec.eigenvalues[1] == doctest::Approx(3 * wv));
    CHECK(dec.eigenvalues[2] == doctest::Approx(3 * wv));
  }
  SUBCASE("asymmetric input rejected") {
    Eigen::SparseMatrix<double> w(2, 2);
    w.insert(0, 1) = 1.0;
    CHECK_THROWS_AS(graph_laplacian(w), std::invalid_argument);
  }
}

TEST_CASE("L annihilates constants and is positive semidefinite") {
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, 300, 11);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, epsilon_schedule(300, 1, 1.5));
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(300);
  CHECK((g.laplacian * ones).cwiseAbs().maxCoeff() < 1e-10);
  SpectralDecomposition dec = eigendecompose(g.laplacian, 5);
  CHECK(dec.eigenvalues[0] > -1e-8);
}

TEST_CASE("epsilon schedule formula and monotonicity") {
  CHECK(epsilon_schedule(1000, 2, 1.0) == doctest::Approx(0.4364).epsilon(1e-3));
  CHECK(epsilon_schedule(250, 1, 1.0) == doctest::Approx(0.4665).epsilon(1e-3));
  CHECK(epsilon_schedule(2000, 1, 1.0) == doctest::Approx(0.3281).epsilon(1e-3));
  for (int n = 3; n < 50; ++n)
    CHECK(epsilon_schedule(n + 1, 1, 1.5) < epsilon_schedule(n, 1, 1.5));
}

TEST_CASE("discrete inner product") {
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(17);
  CHECK(discrete_inner_product(ones, ones) == doctest::Approx(1.0));

  Eigen::VectorXd u(2), v(2);
  u << 1.0, 0.0;
  v << 0.0, 5.0;
  CHECK(discrete_inner_product(u, v) == doctest::Approx(0.0));
  CHECK_THROWS_AS(discrete_inner_product(u, ones), std::invalid_argument);

  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, 10000, 3);
  Eigen::VectorXd phi = circle.eigenfunction_values(1, sample);
  CHECK(discrete_inner_product(phi, phi) == doctest::Approx(1.0).epsilon(5e-2));
}

TEST_CASE("eigendecomposition invariants on a circle graph") {
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, 100, 5);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, epsilon_schedule(100, 1, 1.5));
  SpectralDecomposition dec = eigendecompose(g.laplacian, 7);

  SUBCASE("eigenpair residuals") {
    Eigen::MatrixXd dense(g.laplacian);
    double norm = dense.cwiseAbs().rowwise().sum().maxCoeff();
    for (int i = 0; i < dec.k(); ++i) {
      Eigen::VectorXd resid =
          dense * dec.eigenvectors.col(i) - dec.eigenvalues[i] * dec.eigenvectors.col(i);
      CHECK(resid.norm() <= 1e-8 * norm * std::sqrt(100.0));
    }
  }
  SUBCASE("orthonormality under the discrete inner product") {
    for (int i = 0; i < dec.k(); ++i)
      for (int j = 0; j < dec.k(); ++j) {
        double ip = discrete_inner_product(dec.eigenvectors.col(i), dec.eigenvectors.col(j));
        CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-8);
      }
  }
  SUBCASE("null-space eigenvector is the constant vector") {
    CHECK((dec.eigenvectors.col(0).array() - 1.0).abs().maxCoeff() < 1e-8);
  }
  SUBCASE("ascending eigenvalues match a dense full-spectrum solve") {
    Eigen::MatrixXd dense(g.laplacian);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    for (int i = 0; i < dec.k(); ++i)
      CHECK(std::abs(dec.eigenvalues[i] - es.eigenvalues()[i]) < 1e-8);
  }
}

TEST_CASE("permutation invariance of graph construction") {
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, 40, 9);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, 0.5);

  std::vector<int> perm(40);
  for (int i = 0; i < 40; ++i) perm[i] = i;
  std::mt19937_64 gen(1);
  std::shuffle(perm.begin(), perm.end(), gen);
  Eigen::MatrixXd shuffled(40, 2);
  for (int i = 0; i < 40; ++i) shuffled.row(i) = sample.points.row(perm[i]);
  EpsilonGraph gp = build_epsilon_graph(shuffled, 1, 0.5);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 40; ++j)
      CHECK(gp.weights.coeff(i, j) ==
            doctest::Approx(g.weights.coeff(perm[i], perm[j])).epsilon(1e-14));
}

TEST_CASE("iterative path agrees with a known diagonal spectrum") {
  // n > 4000 routes through the Lanczos solver; a diagonal matrix with
  // well-separated smallest eigenvalues gives an exact reference spectrum.
  const int n = 4100;
  Eigen::SparseMatrix<double> diag(n, n);
  for (int i = 0; i < n; ++i) diag.insert(i, i) = i < 5 ? 1.0 * i : 100.0 + 0.01 * i;
  SpectralDecomposition dec = eigendecompose(diag, 4);
  for (int i = 0; i < 4; ++i)
    CHECK(dec.eigenvalues[i] == doctest::Approx(1.0 * i).epsilon(1e-8));
}

TEST_CASE("Parseval over a full decomposition") {
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, 120, 13);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, epsilon_schedule(120, 1, 1.5));
  SpectralDecomposition dec = eigendecompose(g.laplacian, 120);

  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(120);
  for (int i = 0; i < 120; ++i) u[i] = normal(gen);
  double sum = 0.0;
  for (int i = 0; i < 120; ++i) {
    double c = discrete_inner_product(u, dec.eigenvectors.col(i));
    sum += c * c;
  }
  double norm2 = discrete_inner_product(u, u);
  CHECK(std::abs(sum - norm2) < 1e-6);
}
