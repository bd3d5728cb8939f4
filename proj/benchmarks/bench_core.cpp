#include <benchmark/benchmark.h>

#include "mgnn/filters.hpp"
#include "mgnn/graph.hpp"
#include "mgnn/manifold.hpp"

using namespace mgnn;

static void BM_BuildEpsilonGraph(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, n, 1);
  const double eps = epsilon_schedule(n, 1, 1.5);
  for (auto _ : state) {
    EpsilonGraph g = build_epsilon_graph(sample.points, 1, eps);
    benchmark::DoNotOptimize(g.laplacian);
  }
}
BENCHMARK(BM_BuildEpsilonGraph)->Arg(250)->Arg(1000)->Arg(2000);

static void BM_Eigendecompose(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 3);
  PointSample sample = sample_points(circle, n, 2);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, epsilon_schedule(n, 1, 1.5));
  for (auto _ : state) {
    SpectralDecomposition dec = eigendecompose(g.laplacian, 9);
    benchmark::DoNotOptimize(dec.eigenvalues);
  }
}
BENCHMARK(BM_Eigendecompose)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_HeatFilterApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 5);
  PointSample sample = sample_points(circle, n, 3);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, epsilon_schedule(n, 1, 1.5));
  FilterOperator op = FilterOperator::matrix(g.laplacian, FilterBasis::Heat);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, 1);
  for (auto _ : state) {
    Eigen::MatrixXd y = op.apply(x, 1);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_HeatFilterApply)->Arg(250)->Arg(1000)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_GnnGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ManifoldModel circle = make_manifold(ManifoldKind::Circle, 5);
  PointSample sample = sample_points(circle, n, 4);
  EpsilonGraph g = build_epsilon_graph(sample.points, 1, epsilon_schedule(n, 1, 1.5));
  FilterOperator op = FilterOperator::matrix(g.laplacian, FilterBasis::Polynomial);
  GnnModel model = GnnModel::random({1, 4, 1}, 3, FilterBasis::Polynomial, Activation::Relu, 5);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(n, 1);
  Eigen::MatrixXd y = Eigen::MatrixXd::Random(n, 1);
  for (auto _ : state) {
    GnnGradient grads = gnn_gradient(model, op, x, y, LossKind::L2);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(BM_GnnGradient)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
