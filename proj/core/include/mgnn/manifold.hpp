#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mgnn {

enum class ManifoldKind { Circle, Sphere };

/// N points drawn i.i.d. from the uniform measure on the manifold.
/// `points` are ambient coordinates (unit circle in R^2, unit sphere in R^3),
/// `intrinsic` the parameter-space coordinates (theta; or theta, phi).
struct PointSample {
  Eigen::MatrixXd points;
  Eigen::MatrixXd intrinsic;
  std::uint64_t seed = 0;
  int n() const { return static_cast<int>(points.rows()); }
};

/// Analytic manifold with closed-form Laplacian eigenpairs.
///
/// Eigenvalues are scaled so that they are the actual limits of the
/// epsilon-graph Laplacian spectrum for the kernel used in graph.hpp:
/// lambda_i = sigma_d^2 * (rho/2) * (Laplace-Beltrami eigenvalue), with
/// sigma_d = alpha_d / (d+2) the second moment of the unit-ball indicator.
class ManifoldModel {
 public:
  ManifoldModel(ManifoldKind kind, int bandwidth);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return kind_ == ManifoldKind::Circle ? 1 : 2; }
  int bandwidth() const { return bandwidth_; }

  /// Uniform density value 1/volume.
  double density() const;
  /// rho/2: the weighted Laplace operator reduced at constant density.
  double weighted_laplacian_scale() const;
  /// sigma_d^2 * rho/2: the full graph-kernel limit constant.
  double lambda_scale() const;

  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// phi_i at one intrinsic coordinate; i is 0-based.
  double eigenfunction(int i, const Eigen::VectorXd& intrinsic) const;
  /// phi_i sampled at every point of `sample`.
  Eigen::VectorXd eigenfunction_values(int i, const PointSample& sample) const;

  /// Indices [begin, end) of eigenpairs sharing the eigenvalue of index i.
  std::pair<int, int> multiplet(int i) const;

 private:
  ManifoldKind kind_;
  int bandwidth_;
  Eigen::VectorXd eigenvalues_;
  // Sphere harmonic table: (degree l, order m, 0=zonal 1=cos 2=sin).
  struct Harmonic { int l; int m; int type; };
  std::vector<Harmonic> harmonics_;
};

ManifoldModel make_manifold(ManifoldKind kind, int bandwidth);

PointSample sample_points(const ManifoldModel& manifold, int n, std::uint64_t seed);

/// Bandlimited signal stored as coefficients on the first M eigenfunctions.
struct SpectralSignal {
  Eigen::VectorXd coeffs;
  const ManifoldModel* manifold = nullptr;

  double norm() const { return coeffs.norm(); }  // Parseval
};

/// The sampling operator P_N: v_i = sum_j coeffs_j phi_j(x_i).
Eigen::VectorXd evaluate_signal(const SpectralSignal& signal, const PointSample& sample);

/// Spectral application of a heat-basis manifold filter:
/// out_i = hhat(lambda_i) * coeffs_i with hhat(l) = sum_k taps_k e^{-k l}.
SpectralSignal manifold_filter_apply(std::span<const double> taps, const SpectralSignal& signal);
/// Overload with explicit eigenvalues (synthetic spectra in tests).
SpectralSignal manifold_filter_apply(std::span<const double> taps, const SpectralSignal& signal,
                                     const Eigen::VectorXd& eigenvalues);

/// Deterministic quadrature used to re-project post-activation signals:
/// uniform grid on the circle, fixed-seed Monte-Carlo on the sphere.
struct QuadratureRule {
  PointSample nodes;
  Eigen::VectorXd weights;  // sums to 1 (probability measure)
};
QuadratureRule make_quadrature(const ManifoldModel& manifold, int q);

/// Project a function given by values at quadrature nodes onto the first M
/// eigenfunctions.
SpectralSignal project_to_bandlimited(const ManifoldModel& manifold, const QuadratureRule& quad,
                                      const Eigen::VectorXd& values);

class GnnModel;  // filters.hpp

/// Exact manifold neural network evaluated at `eval_points`.
/// Layer 1 is computed exactly in the spectral domain; deeper layers
/// re-project the post-activation signal by quadrature (q nodes).
/// Returns an n x F_L matrix. Requires the heat filter basis.
Eigen::MatrixXd mnn_forward(const GnnModel& model, const std::vector<SpectralSignal>& inputs,
                            const PointSample& eval_points, int quadrature_q = 0);

}  // namespace mgnn
