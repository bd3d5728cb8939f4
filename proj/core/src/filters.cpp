#include "mgnn/filters.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "mgnn/rng.hpp"

namespace mgnn {

std::string to_string(FilterBasis b) { return b == FilterBasis::Heat ? "heat" : "polynomial"; }
std::string to_string(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Abs: return "abs";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "?";
}
std::string to_string(LossKind l) { return l == LossKind::L2 ? "l2" : "cross_entropy"; }

FilterBasis filter_basis_from_string(const std::string& s) {
  if (s == "heat") return FilterBasis::Heat;
  if (s == "polynomial") return FilterBasis::Polynomial;
  throw std::invalid_argument("unknown filter basis: " + s);
}
Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "abs") return Activation::Abs;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation: " + s);
}
LossKind loss_from_string(const std::string& s) {
  if (s == "l2") return LossKind::L2;
  if (s == "cross_entropy") return LossKind::CrossEntropy;
  throw std::invalid_argument("unknown loss: " + s);
}

double frequency_response(const FilterCoeffs& filter, double lambda) {
  double acc = 0.0;
  if (filter.basis == FilterBasis::Heat) {
    for (std::size_t k = 0; k < filter.taps.size(); ++k)
      acc += filter.taps[k] * std::exp(-static_cast<double>(k) * lambda);
  } else {
    double p = 1.0;
    for (std::size_t k = 0; k < filter.taps.size(); ++k) {
      acc += filter.taps[k] * p;
      p *= lambda;
    }
  }
  return acc;
}

LowPassReport check_low_pass(const FilterCoeffs& filter, int d, int grid_points) {
  if (filter.basis != FilterBasis::Heat)
    throw std::invalid_argument("low-pass certificate is defined for the heat basis");
  LowPassReport report;
  report.passes = true;
  const double tail_start = static_cast<double>(std::max<std::size_t>(filter.taps.size(), 2));
  double prev = 0.0;
  bool have_prev = false;
  for (int i = 0; i < grid_points; ++i) {
    double a = std::pow(10.0, 2.0 * i / (grid_points - 1));  // [1, 100] log grid
    double g = std::abs(frequency_response(filter, a)) * std::pow(a, d);
    if (g > report.sup) report.sup = g;
    if (a >= tail_start) {
      if (have_prev && g > prev * (1.0 + 1e-9)) {
        report.passes = false;
        report.worst_a = a;
      }
      prev = g;
      have_prev = true;
    }
  }
  return report;
}

double activation_value(Activation kind, double x) {
  switch (kind) {
    case Activation::Relu: return x > 0.0 ? x : 0.0;
    case Activation::Abs: return std::abs(x);
    case Activation::Tanh: return std::tanh(x);
    case Activation::Identity: return x;
  }
  return x;
}

double activation_derivative(Activation kind, double x) {
  switch (kind) {
    case Activation::Relu: return x > 0.0 ? 1.0 : 0.0;
    case Activation::Abs: return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    case Activation::Tanh: {
      double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

Eigen::VectorXd activation_apply(Activation kind, const Eigen::VectorXd& x) {
  return x.unaryExpr([kind](double v) { return activation_value(kind, v); });
}
Eigen::MatrixXd activation_apply(Activation kind, const Eigen::MatrixXd& x) {
  return x.unaryExpr([kind](double v) { return activation_value(kind, v); });
}

GnnModel::GnnModel(std::vector<int> feature_dims, int taps, FilterBasis basis,
                   Activation activation)
    : feature_dims_(std::move(feature_dims)), taps_(taps), basis_(basis), activation_(activation) {
  if (feature_dims_.size() < 2) throw std::invalid_argument("need at least one layer");
  if (taps_ < 1) throw std::invalid_argument("need at least one tap");
  coeffs_.resize(feature_dims_.size() - 1);
  for (std::size_t l = 0; l + 1 < feature_dims_.size(); ++l) {
    coeffs_[l].assign(taps_, Eigen::MatrixXd::Zero(feature_dims_[l], feature_dims_[l + 1]));
  }
}

GnnModel GnnModel::random(std::vector<int> feature_dims, int taps, FilterBasis basis,
                          Activation activation, std::uint64_t seed, double scale, bool low_pass) {
  GnnModel m(std::move(feature_dims), taps, basis, activation);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < m.layers(); ++l) {
    double norm = scale / std::sqrt(static_cast<double>(m.feature_dims_[l] * taps));
    for (int k = 0; k < taps; ++k)
      for (int r = 0; r < m.coeffs_[l][k].rows(); ++r)
        for (int c = 0; c < m.coeffs_[l][k].cols(); ++c)
          m.coeffs_[l][k](r, c) = norm * (2.0 * uniform01(rng) - 1.0);
  }
  if (low_pass) m.enforce_low_pass();
  return m;
}

std::vector<double> GnnModel::filter_taps(int layer, int p, int q) const {
  std::vector<double> taps(taps_);
  for (int k = 0; k < taps_; ++k) taps[k] = coeffs_[layer][k](q, p);
  return taps;
}

void GnnModel::enforce_low_pass() {
  if (basis_ != FilterBasis::Heat)
    throw std::invalid_argument("low-pass constraint applies to the heat basis");
  for (auto& layer : coeffs_) layer[0].setZero();
}

bool GnnModel::is_low_pass() const {
  if (basis_ != FilterBasis::Heat) return false;
  for (const auto& layer : coeffs_)
    if (layer[0].cwiseAbs().maxCoeff() != 0.0) return false;
  return true;
}

int GnnModel::parameter_count() const {
  int count = 0;
  for (const auto& layer : coeffs_)
    for (const auto& m : layer) count += static_cast<int>(m.size());
  return count;
}

std::string GnnModel::to_json() const {
  nlohmann::json j;
  j["basis"] = to_string(basis_);
  j["activation"] = to_string(activation_);
  j["feature_dims"] = feature_dims_;
  j["taps"] = taps_;
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& layer : coeffs_)
    for (const auto& m : layer)
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  j["coeffs"] = flat;  // layer-major: layer, tap, in-feature row, out-feature col
  return j.dump(2);
}

GnnModel GnnModel::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  GnnModel m(j.at("feature_dims").get<std::vector<int>>(), j.at("taps").get<int>(),
             filter_basis_from_string(j.at("basis").get<std::string>()),
             activation_from_string(j.at("activation").get<std::string>()));
  std::vector<double> flat = j.at("coeffs").get<std::vector<double>>();
  if (static_cast<int>(flat.size()) != m.parameter_count())
    throw std::invalid_argument("coefficient array does not match the layer dimensions");
  std::size_t idx = 0;
  for (auto& layer : m.coeffs_)
    for (auto& mat : layer)
      for (int r = 0; r < mat.rows(); ++r)
        for (int c = 0; c < mat.cols(); ++c) mat(r, c) = flat[idx++];
  return m;
}

void GnnModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_json() << '\n';
}

GnnModel GnnModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

FilterOperator FilterOperator::spectral(SpectralDecomposition decomposition, FilterBasis basis) {
  FilterOperator op;
  op.spectral_ = true;
  op.n_ = static_cast<int>(decomposition.eigenvectors.rows());
  op.basis_ = basis;
  op.dec_ = std::move(decomposition);
  return op;
}

FilterOperator FilterOperator::matrix(Eigen::SparseMatrix<double> laplacian, FilterBasis basis) {
  FilterOperator op;
  op.spectral_ = false;
  op.n_ = static_cast<int>(laplacian.rows());
  op.basis_ = basis;
  op.lap_ = std::move(laplacian);
  for (int col = 0; col < op.lap_.outerSize(); ++col) {
    double row_abs = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.lap_, col); it; ++it)
      row_abs += std::abs(it.value());
    op.lap_norm_bound_ = std::max(op.lap_norm_bound_, row_abs);
  }
  return op;
}

Eigen::MatrixXd FilterOperator::heat_step(const Eigen::MatrixXd& x) const {
  // e^{-L} x by scaling-and-squaring truncated series; L is PSD with a
  // modest Gershgorin bound, so few squarings are needed.
  int squarings = 0;
  double norm = lap_norm_bound_;
  while (norm > 1.0) {
    norm *= 0.5;
    ++squarings;
  }
  double scale = std::pow(0.5, squarings);
  Eigen::MatrixXd y = x;
  for (int s = 0; s < (1 << squarings); ++s) {
    Eigen::MatrixXd term = y;
    Eigen::MatrixXd acc = y;
    for (int j = 1; j < 40; ++j) {
      term = (lap_ * term) * (-scale / j);
      acc += term;
      if (term.cwiseAbs().maxCoeff() < 1e-16 * (1.0 + acc.cwiseAbs().maxCoeff())) break;
    }
    y = acc;
  }
  return y;
}

Eigen::MatrixXd FilterOperator::apply(const Eigen::MatrixXd& x, int k) const {
  if (spectral_) {
    Eigen::MatrixXd proj = dec_.eigenvectors.transpose() * x / static_cast<double>(n_);
    Eigen::ArrayXd response;
    if (basis_ == FilterBasis::Heat)
      response = (-static_cast<double>(k) * dec_.eigenvalues.array()).exp();
    else if (k == 0)
      response = Eigen::ArrayXd::Ones(dec_.eigenvalues.size());  // 0^0 = 1
    else
      response = dec_.eigenvalues.array().pow(static_cast<double>(k));
    return dec_.eigenvectors * (response.matrix().asDiagonal() * proj);
  }
  Eigen::MatrixXd y = x;
  for (int step = 0; step < k; ++step)
    y = basis_ == FilterBasis::Heat ? heat_step(y) : Eigen::MatrixXd(lap_ * y);
  return y;
}

Eigen::MatrixXd FilterOperator::shifted(const Eigen::MatrixXd& x, int taps) const {
  const int f = static_cast<int>(x.cols());
  Eigen::MatrixXd blocks(n_, f * taps);
  if (spectral_) {
    for (int k = 0; k < taps; ++k) blocks.middleCols(k * f, f) = apply(x, k);
  } else {
    Eigen::MatrixXd cur = x;
    for (int k = 0; k < taps; ++k) {
      blocks.middleCols(k * f, f) = cur;
      if (k + 1 < taps)
        cur = basis_ == FilterBasis::Heat ? heat_step(cur) : Eigen::MatrixXd(lap_ * cur);
    }
  }
  return blocks;
}

Eigen::VectorXd graph_filter_apply(const FilterCoeffs& filter, const SpectralDecomposition& dec,
                                   const Eigen::VectorXd& x) {
  const double n = static_cast<double>(x.size());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (int i = 0; i < dec.k(); ++i) {
    double coeff = frequency_response(filter, dec.eigenvalues[i]) *
                   dec.eigenvectors.col(i).dot(x) / n;
    out += coeff * dec.eigenvectors.col(i);
  }
  return out;
}

Eigen::MatrixXd gnn_forward(const GnnModel& model, const FilterOperator& op,
                            const Eigen::MatrixXd& inputs, GnnTrace* trace,
                            const Eigen::MatrixXd* shifted_input, bool linear_output) {
  if (static_cast<int>(inputs.cols()) != model.feature_dims().front())
    throw std::invalid_argument("input feature count does not match the model");
  if (static_cast<int>(inputs.rows()) != op.n())
    throw std::invalid_argument("signal length does not match the graph");
  if (trace) {
    trace->shifted.clear();
    trace->preact.clear();
  }
  Eigen::MatrixXd x = inputs;
  for (int l = 0; l < model.layers(); ++l) {
    const int f_in = model.feature_dims()[l];
    const int f_out = model.feature_dims()[l + 1];
    Eigen::MatrixXd blocks =
        (l == 0 && shifted_input) ? *shifted_input : op.shifted(x, model.taps());
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(op.n(), f_out);
    for (int k = 0; k < model.taps(); ++k)
      z.noalias() += blocks.middleCols(k * f_in, f_in) * model.tap(l, k);
    if (trace) {
      trace->shifted.push_back(std::move(blocks));
      trace->preact.push_back(z);
    }
    bool skip_sigma = linear_output && l + 1 == model.layers();
    x = skip_sigma ? z : activation_apply(model.activation(), z);
  }
  return x;
}

namespace {
std::vector<int> all_rows(int n) {
  std::vector<int> rows(n);
  for (int i = 0; i < n; ++i) rows[i] = i;
  return rows;
}
}  // namespace

double loss_value(LossKind kind, const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                  const std::vector<int>* rows) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("prediction/target shape mismatch");
  std::vector<int> full;
  if (!rows) {
    full = all_rows(static_cast<int>(pred.rows()));
    rows = &full;
  }
  if (rows->empty()) throw std::invalid_argument("empty loss row set");
  const double n = static_cast<double>(rows->size());
  double total = 0.0;
  for (int r : *rows) {
    if (kind == LossKind::L2) {
      total += (pred.row(r) - target.row(r)).squaredNorm() / pred.cols();
    } else {
      // cross-entropy with one-hot targets; row-wise log-sum-exp for stability
      double mx = pred.row(r).maxCoeff();
      double lse = std::log((pred.row(r).array() - mx).exp().sum()) + mx;
      total += lse - pred.row(r).dot(target.row(r));
    }
  }
  return total / n;
}

Eigen::MatrixXd loss_gradient(LossKind kind, const Eigen::MatrixXd& pred,
                              const Eigen::MatrixXd& target, const std::vector<int>* rows) {
  std::vector<int> full;
  if (!rows) {
    full = all_rows(static_cast<int>(pred.rows()));
    rows = &full;
  }
  if (rows->empty()) throw std::invalid_argument("empty loss row set");
  const double n = static_cast<double>(rows->size());
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(pred.rows(), pred.cols());
  for (int r : *rows) {
    if (kind == LossKind::L2) {
      grad.row(r) = 2.0 * (pred.row(r) - target.row(r)) / (n * pred.cols());
    } else {
      double mx = pred.row(r).maxCoeff();
      Eigen::ArrayXd e = (pred.row(r).array() - mx).exp();
      grad.row(r) = ((e / e.sum()).matrix().transpose() - target.row(r)) / n;
    }
  }
  return grad;
}

GnnGradient gnn_gradient(const GnnModel& model, const FilterOperator& op,
                         const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                         LossKind loss, const Eigen::MatrixXd* shifted_input, bool linear_output,
                         const std::vector<int>* loss_rows) {
  GnnTrace trace;
  Eigen::MatrixXd pred = gnn_forward(model, op, inputs, &trace, shifted_input, linear_output);
  Eigen::MatrixXd upstream = loss_gradient(loss, pred, targets, loss_rows);

  GnnGradient grads(model.layers());
  for (int l = model.layers() - 1; l >= 0; --l) {
    const int f_in = model.feature_dims()[l];
    bool skip_sigma = linear_output && l + 1 == model.layers();
    Eigen::MatrixXd dz = upstream;
    if (!skip_sigma) {
      Activation act = model.activation();
      dz = upstream.cwiseProduct(trace.preact[l].unaryExpr(
          [act](double v) { return activation_derivative(act, v); }));
    }
    grads[l].resize(model.taps());
    for (int k = 0; k < model.taps(); ++k)
      grads[l][k] = trace.shifted[l].middleCols(k * f_in, f_in).transpose() * dz;
    if (l > 0) {
      Eigen::MatrixXd down = Eigen::MatrixXd::Zero(op.n(), f_in);
      // B_k is symmetric in both operator families.
      for (int k = 0; k < model.taps(); ++k)
        down += op.apply(dz * model.tap(l, k).transpose(), k);
      upstream = std::move(down);
    }
  }
  return grads;
}

}  // namespace mgnn
