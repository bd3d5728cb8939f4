#include "mgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace mgnn {

double unit_ball_volume(int d) {
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  // alpha_d = pi^{d/2} / Gamma(d/2 + 1)
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

EpsilonGraph build_epsilon_graph(const Eigen::MatrixXd& points, int dim, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  const int n = static_cast<int>(points.rows());
  const double w = unit_ball_volume(dim) /
                   ((dim + 2.0) * n * std::pow(epsilon, dim + 2.0));
  std::vector<Eigen::Triplet<double>> triplets;
  const double eps2 = epsilon * epsilon;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d2 = (points.row(i) - points.row(j)).squaredNorm();
      if (d2 > 0.0 && d2 <= eps2) {  // boundary included
        triplets.emplace_back(i, j, w);
        triplets.emplace_back(j, i, w);
      }
    }
  }
  EpsilonGraph g;
  g.n = n;
  g.dim = dim;
  g.epsilon = epsilon;
  g.weights.resize(n, n);
  g.weights.setFromTriplets(triplets.begin(), triplets.end());
  g.laplacian = graph_laplacian(g.weights);
  for (int i = 0; i < n; ++i)
    if (g.weights.outerIndexPtr()[i + 1] == g.weights.outerIndexPtr()[i]) ++g.isolated_nodes;
  return g;
}

Eigen::SparseMatrix<double> graph_laplacian(const Eigen::SparseMatrix<double>& weights) {
  const int n = static_cast<int>(weights.rows());
  if (weights.cols() != n) throw std::invalid_argument("weight matrix must be square");
  Eigen::SparseMatrix<double> wt = weights.transpose();
  if (!weights.isApprox(wt, 1e-12)) throw std::invalid_argument("weight matrix must be symmetric");
  Eigen::VectorXd deg = weights * Eigen::VectorXd::Ones(n);
  Eigen::SparseMatrix<double> lap(n, n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(weights.nonZeros() + n);
  for (int k = 0; k < weights.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(weights, k); it; ++it)
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value());
  for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, deg[i]);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  return lap;
}

double epsilon_schedule(int n, int d, double c) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  if (c <= 0.0) throw std::invalid_argument("c must be positive");
  return c * std::pow(std::log(static_cast<double>(n)) / n, 1.0 / (d + 4.0));
}

double discrete_inner_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw std::invalid_argument("length mismatch");
  return u.dot(v) / static_cast<double>(u.size());
}

double discrete_norm(const Eigen::VectorXd& u) {
  return std::sqrt(discrete_inner_product(u, u));
}

double SpectralDecomposition::eigengap(int i) const {
  double gap = std::numeric_limits<double>::infinity();
  if (i > 0) gap = std::min(gap, eigenvalues[i] - eigenvalues[i - 1]);
  if (i + 1 < k()) gap = std::min(gap, eigenvalues[i + 1] - eigenvalues[i]);
  return gap;
}

namespace {

void fix_signs_and_normalize(Eigen::MatrixXd& vectors) {
  const double n = static_cast<double>(vectors.rows());
  for (int c = 0; c < vectors.cols(); ++c) {
    vectors.col(c) *= std::sqrt(n) / vectors.col(c).norm();
    for (int r = 0; r < vectors.rows(); ++r) {
      if (std::abs(vectors(r, c)) > 1e-12) {
        if (vectors(r, c) < 0.0) vectors.col(c) = -vectors.col(c);
        break;
      }
    }
  }
}

// Shifted Lanczos with full reorthogonalization: largest eigenpairs of
// (c I - L) are the smallest of L.
SpectralDecomposition lanczos_smallest(const Eigen::SparseMatrix<double>& lap, int k) {
  const int n = static_cast<int>(lap.rows());
  double shift = 0.0;
  for (int col = 0; col < lap.outerSize(); ++col) {
    double row_abs = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(lap, col); it; ++it)
      row_abs += std::abs(it.value());
    shift = std::max(shift, row_abs);
  }
  shift += 1.0;

  const int m = std::min(n, std::max(8 * k + 80, 160));
  Eigen::MatrixXd basis(n, m);
  Eigen::VectorXd alpha(m), beta(m);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) +
                      Eigen::VectorXd::LinSpaced(n, 0.0, 1.0).unaryExpr([](double x) {
                        return std::sin(37.0 * x);
                      });
  v.normalize();
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    basis.col(j) = v;
    Eigen::VectorXd w = shift * v - lap * v;
    alpha[j] = v.dot(w);
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
    w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);  // twice is enough
    beta[j] = w.norm();
    steps = j + 1;
    if (beta[j] < 1e-12) break;
    v = w / beta[j];
  }
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(steps, steps);
  for (int j = 0; j < steps; ++j) {
    tri(j, j) = alpha[j];
    if (j + 1 < steps) tri(j, j + 1) = tri(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
  if (es.info() != Eigen::Success) throw std::runtime_error("lanczos tridiagonal solve failed");
  SpectralDecomposition dec;
  dec.eigenvalues.resize(k);
  dec.eigenvectors.resize(n, k);
  // es returns ascending; largest of (shift - lambda) come last.
  for (int i = 0; i < k; ++i) {
    int src = steps - 1 - i;
    dec.eigenvalues[i] = shift - es.eigenvalues()[src];
    dec.eigenvectors.col(i) = basis.leftCols(steps) * es.eigenvectors().col(src);
  }
  fix_signs_and_normalize(dec.eigenvectors);
  return dec;
}

}  // namespace

SpectralDecomposition eigendecompose(const Eigen::SparseMatrix<double>& laplacian, int k) {
  const int n = static_cast<int>(laplacian.rows());
  if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, n]");
  if (n > 4000) return lanczos_smallest(laplacian, k);
  Eigen::MatrixXd dense(laplacian);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "eigendecomposition failed (n=%d, nnz=%d)", n,
                  static_cast<int>(laplacian.nonZeros()));
    throw std::runtime_error(msg);
  }
  SpectralDecomposition dec;
  dec.eigenvalues = es.eigenvalues().head(k);
  dec.eigenvectors = es.eigenvectors().leftCols(k);
  fix_signs_and_normalize(dec.eigenvectors);
  return dec;
}

namespace {
void write_value(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_weights_csv(const std::string& path, const EpsilonGraph& graph) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "i,j,weight\n";
  for (int col = 0; col < graph.weights.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(graph.weights, col); it; ++it)
      if (it.row() < it.col()) {
        out << it.row() << ',' << it.col() << ',';
        write_value(out, it.value());
        out << '\n';
      }
}

void write_eigenvalues_csv(const std::string& path, const SpectralDecomposition& dec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "index,eigenvalue\n";
  for (int i = 0; i < dec.k(); ++i) {
    out << (i + 1) << ',';
    write_value(out, dec.eigenvalues[i]);
    out << '\n';
  }
}

void write_eigenvectors_csv(const std::string& path, const SpectralDecomposition& dec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "node";
  for (int i = 0; i < dec.k(); ++i) out << ",phi" << (i + 1);
  out << '\n';
  for (int r = 0; r < dec.eigenvectors.rows(); ++r) {
    out << r;
    for (int c = 0; c < dec.k(); ++c) {
      out << ',';
      write_value(out, dec.eigenvectors(r, c));
    }
    out << '\n';
  }
}

}  // namespace mgnn
