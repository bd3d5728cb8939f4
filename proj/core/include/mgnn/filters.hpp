#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgnn/graph.hpp"

namespace mgnn {

enum class FilterBasis { Heat, Polynomial };
enum class Activation { Relu, Abs, Tanh, Identity };
enum class LossKind { L2, CrossEntropy };

std::string to_string(FilterBasis b);
std::string to_string(Activation a);
std::string to_string(LossKind l);
FilterBasis filter_basis_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);

/// A single filter: taps h_0..h_{K-1} with response
///   heat:       hhat(l) = sum_k h_k e^{-k l}
///   polynomial: h(l)    = sum_k h_k l^k
struct FilterCoeffs {
  std::vector<double> taps;
  FilterBasis basis = FilterBasis::Heat;
};

double frequency_response(const FilterCoeffs& filter, double lambda);

/// Low-pass certificate per |hhat(a)| = O(a^{-d}): evaluates
/// |hhat(a)| * a^d over a log grid on [1, 100] and checks the tail decays.
struct LowPassReport {
  bool passes = false;
  double sup = 0.0;
  double worst_a = 0.0;  // location where monotone tail decay failed, if any
};
LowPassReport check_low_pass(const FilterCoeffs& filter, int d, int grid_points = 256);

double activation_value(Activation kind, double x);
double activation_derivative(Activation kind, double x);  // subgradient 0 at the ReLU kink
Eigen::VectorXd activation_apply(Activation kind, const Eigen::VectorXd& x);
Eigen::MatrixXd activation_apply(Activation kind, const Eigen::MatrixXd& x);

/// Layered filter bank: coeffs[l][k] is an F_{l} x F_{l+1} matrix of the
/// k-th taps of every (in-feature, out-feature) filter pair.
class GnnModel {
 public:
  GnnModel() = default;
  GnnModel(std::vector<int> feature_dims, int taps, FilterBasis basis, Activation activation);

  static GnnModel random(std::vector<int> feature_dims, int taps, FilterBasis basis,
                         Activation activation, std::uint64_t seed, double scale = 1.0,
                         bool low_pass = false);

  int layers() const { return static_cast<int>(coeffs_.size()); }
  int taps() const { return taps_; }
  FilterBasis basis() const { return basis_; }
  Activation activation() const { return activation_; }
  const std::vector<int>& feature_dims() const { return feature_dims_; }

  Eigen::MatrixXd& tap(int layer, int k) { return coeffs_[layer][k]; }
  const Eigen::MatrixXd& tap(int layer, int k) const { return coeffs_[layer][k]; }

  /// Taps of the (layer, out p, in q) scalar filter.
  std::vector<double> filter_taps(int layer, int p, int q) const;

  /// Heat-basis low-pass constraint: h_0 = 0 everywhere.
  void enforce_low_pass();
  bool is_low_pass() const;

  int parameter_count() const;

  std::string to_json() const;
  static GnnModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static GnnModel load(const std::string& path);

 private:
  std::vector<int> feature_dims_;
  int taps_ = 0;
  FilterBasis basis_ = FilterBasis::Heat;
  Activation activation_ = Activation::Relu;
  std::vector<std::vector<Eigen::MatrixXd>> coeffs_;
};

/// Applies the basis operators B_k of a graph shift to signals:
///   polynomial: B_k = L^k
///   heat:       B_k = e^{-kL} (spectrally, or by truncated-series expm)
/// Both families are symmetric, which the gradient relies on.
class FilterOperator {
 public:
  /// Spectral route through an explicit (possibly truncated) decomposition.
  static FilterOperator spectral(SpectralDecomposition decomposition, FilterBasis basis);
  /// Matrix route on the sparse Laplacian; supports both bases (heat uses
  /// scaling-and-squaring truncated series for e^{-L}).
  static FilterOperator matrix(Eigen::SparseMatrix<double> laplacian, FilterBasis basis);

  int n() const { return n_; }
  FilterBasis basis() const { return basis_; }

  /// B_k x.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x, int k) const;
  /// [B_0 X | B_1 X | ... | B_{K-1} X], an n x (F*K) block matrix.
  Eigen::MatrixXd shifted(const Eigen::MatrixXd& x, int taps) const;

 private:
  FilterOperator() = default;
  Eigen::MatrixXd heat_step(const Eigen::MatrixXd& x) const;  // e^{-L} x
  bool spectral_ = false;
  int n_ = 0;
  FilterBasis basis_ = FilterBasis::Heat;
  SpectralDecomposition dec_;
  Eigen::SparseMatrix<double> lap_;
  double lap_norm_bound_ = 0.0;  // Gershgorin bound, sets the expm scaling
};

/// Spectral graph filter: sum_i response(lambda_i) <x, phi_i>_N phi_i over the
/// eigenpairs the decomposition carries.
Eigen::VectorXd graph_filter_apply(const FilterCoeffs& filter, const SpectralDecomposition& dec,
                                   const Eigen::VectorXd& x);

struct GnnTrace {
  std::vector<Eigen::MatrixXd> shifted;  // per layer: n x (F_in * K)
  std::vector<Eigen::MatrixXd> preact;   // per layer: n x F_out
};

/// Forward pass; layer l computes sigma(sum_k B_k X_{l-1} H_{l,k}).
/// `shifted_input` optionally supplies the precomputed layer-1 block (the
/// input signal never changes during training, so trainers reuse it).
/// The last layer of a classifier is conventionally linear; `linear_output`
/// skips the activation there.
Eigen::MatrixXd gnn_forward(const GnnModel& model, const FilterOperator& op,
                            const Eigen::MatrixXd& inputs, GnnTrace* trace = nullptr,
                            const Eigen::MatrixXd* shifted_input = nullptr,
                            bool linear_output = false);

/// `rows` restricts the loss to a node subset (transductive masking); the
/// gradient is zero outside it.
double loss_value(LossKind kind, const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                  const std::vector<int>* rows = nullptr);
Eigen::MatrixXd loss_gradient(LossKind kind, const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& target,
                              const std::vector<int>* rows = nullptr);

using GnnGradient = std::vector<std::vector<Eigen::MatrixXd>>;

/// Exact reverse-mode gradient of loss(forward(inputs), targets) w.r.t. every
/// filter coefficient. Shape mirrors GnnModel::tap.
GnnGradient gnn_gradient(const GnnModel& model, const FilterOperator& op,
                         const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         LossKind loss, const Eigen::MatrixXd* shifted_input = nullptr,
                         bool linear_output = false, const std::vector<int>* loss_rows = nullptr);

}  // namespace mgnn
