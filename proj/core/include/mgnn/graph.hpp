#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

namespace mgnn {

/// epsilon-graph on sampled points with the indicator kernel
///   W_ij = alpha_d / ((d+2) N eps^{d+2})  when 0 < |x_i - x_j| <= eps.
struct EpsilonGraph {
  int n = 0;
  int dim = 0;
  double epsilon = 0.0;
  Eigen::SparseMatrix<double> weights;
  Eigen::SparseMatrix<double> laplacian;  // diag(W 1) - W
  int isolated_nodes = 0;                 // warning, not fatal
};

/// Volume of the d-dimensional Euclidean unit ball (alpha_1 = 2, alpha_2 = pi).
double unit_ball_volume(int d);

EpsilonGraph build_epsilon_graph(const Eigen::MatrixXd& points, int dim, double epsilon);

/// L = diag(row sums) - W. Rejects asymmetric input.
Eigen::SparseMatrix<double> graph_laplacian(const Eigen::SparseMatrix<double>& weights);

/// eps = c * (log N / N)^{1/(d+4)}.
double epsilon_schedule(int n, int d, double c);

/// <u, v>_N = (1/N) sum u_i v_i.
double discrete_inner_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double discrete_norm(const Eigen::VectorXd& u);

/// K smallest eigenpairs of L, eigenvalues ascending, eigenvectors with
/// ||phi||_N = 1 and first nonzero component positive.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // n x k columns
  int k() const { return static_cast<int>(eigenvalues.size()); }
  /// theta_i = min distance to a neighboring eigenvalue.
  double eigengap(int i) const;
};

SpectralDecomposition eigendecompose(const Eigen::SparseMatrix<double>& laplacian, int k);

/// CSV export: `i,j,weight` (upper triangle) and `index,eigenvalue` plus a
/// wide eigenvector matrix.
void write_weights_csv(const std::string& path, const EpsilonGraph& graph);
void write_eigenvalues_csv(const std::string& path, const SpectralDecomposition& dec);
void write_eigenvectors_csv(const std::string& path, const SpectralDecomposition& dec);

}  // namespace mgnn
