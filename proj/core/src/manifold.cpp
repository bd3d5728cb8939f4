#include "mgnn/manifold.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mgnn/filters.hpp"
#include "mgnn/rng.hpp"

namespace mgnn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxSphereDegree = 30;

// sqrt((2l+1) (l-m)! / (l+m)!) via lgamma, stable for the degrees we table.
double sphere_norm(int l, int m) {
  double lognum = std::lgamma(l - m + 1.0);
  double logden = std::lgamma(l + m + 1.0);
  return std::sqrt((2.0 * l + 1.0) * std::exp(lognum - logden));
}

}  // namespace

ManifoldModel::ManifoldModel(ManifoldKind kind, int bandwidth) : kind_(kind), bandwidth_(bandwidth) {
  if (bandwidth < 1) throw std::invalid_argument("bandwidth must be >= 1");
  eigenvalues_.resize(bandwidth);
  const double scale = lambda_scale();
  if (kind_ == ManifoldKind::Circle) {
    for (int i = 0; i < bandwidth; ++i) {
      int k = (i + 1) / 2;
      eigenvalues_[i] = scale * static_cast<double>(k) * k;
    }
  } else {
    harmonics_.reserve(bandwidth);
    for (int l = 0; l <= kMaxSphereDegree && static_cast<int>(harmonics_.size()) < bandwidth; ++l) {
      harmonics_.push_back({l, 0, 0});
      for (int m = 1; m <= l && static_cast<int>(harmonics_.size()) < bandwidth; ++m) {
        harmonics_.push_back({l, m, 1});
        if (static_cast<int>(harmonics_.size()) < bandwidth) harmonics_.push_back({l, m, 2});
      }
    }
    if (static_cast<int>(harmonics_.size()) < bandwidth)
      throw std::invalid_argument("bandwidth exceeds the tabled spherical harmonic degrees");
    for (int i = 0; i < bandwidth; ++i) {
      double l = harmonics_[i].l;
      eigenvalues_[i] = scale * l * (l + 1.0);
    }
  }
}

double ManifoldModel::density() const {
  return kind_ == ManifoldKind::Circle ? 1.0 / (2.0 * kPi) : 1.0 / (4.0 * kPi);
}

double ManifoldModel::weighted_laplacian_scale() const { return density() / 2.0; }

double ManifoldModel::lambda_scale() const {
  // sigma_d = alpha_d/(d+2): second moment of the unit-ball indicator kernel.
  double sigma = kind_ == ManifoldKind::Circle ? 2.0 / 3.0 : kPi / 4.0;
  return sigma * sigma * weighted_laplacian_scale();
}

double ManifoldModel::eigenfunction(int i, const Eigen::VectorXd& intrinsic) const {
  if (i < 0 || i >= bandwidth_) throw std::out_of_range("eigenfunction index");
  if (kind_ == ManifoldKind::Circle) {
    if (i == 0) return 1.0;
    int k = (i + 1) / 2;
    double th = intrinsic[0];
    return std::sqrt(2.0) * (i % 2 == 1 ? std::cos(k * th) : std::sin(k * th));
  }
  const auto& h = harmonics_[i];
  double ct = std::cos(intrinsic[0]);
  double phi = intrinsic[1];
  // Orthonormal under the probability measure: sqrt(4 pi) * real Y_lm.
  double p = std::assoc_legendre(h.l, h.m, ct);
  double v = sphere_norm(h.l, h.m) * p;
  if (h.type == 1) v *= std::sqrt(2.0) * std::cos(h.m * phi);
  if (h.type == 2) v *= std::sqrt(2.0) * std::sin(h.m * phi);
  return v;
}

Eigen::VectorXd ManifoldModel::eigenfunction_values(int i, const PointSample& sample) const {
  Eigen::VectorXd out(sample.n());
  for (int j = 0; j < sample.n(); ++j) out[j] = eigenfunction(i, sample.intrinsic.row(j));
  return out;
}

std::pair<int, int> ManifoldModel::multiplet(int i) const {
  int begin = i, end = i + 1;
  while (begin > 0 && eigenvalues_[begin - 1] == eigenvalues_[i]) --begin;
  while (end < bandwidth_ && eigenvalues_[end] == eigenvalues_[i]) ++end;
  return {begin, end};
}

ManifoldModel make_manifold(ManifoldKind kind, int bandwidth) {
  return ManifoldModel(kind, bandwidth);
}

PointSample sample_points(const ManifoldModel& manifold, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::mt19937_64 rng(seed);
  PointSample s;
  s.seed = seed;
  if (manifold.kind() == ManifoldKind::Circle) {
    s.points.resize(n, 2);
    s.intrinsic.resize(n, 1);
    for (int i = 0; i < n; ++i) {
      double th = 2.0 * kPi * uniform01(rng);
      s.intrinsic(i, 0) = th;
      s.points(i, 0) = std::cos(th);
      s.points(i, 1) = std::sin(th);
    }
  } else {
    s.points.resize(n, 3);
    s.intrinsic.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      double ct = 2.0 * uniform01(rng) - 1.0;
      double phi = 2.0 * kPi * uniform01(rng);
      double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      s.intrinsic(i, 0) = std::acos(ct);
      s.intrinsic(i, 1) = phi;
      s.points(i, 0) = st * std::cos(phi);
      s.points(i, 1) = st * std::sin(phi);
      s.points(i, 2) = ct;
    }
  }
  return s;
}

Eigen::VectorXd evaluate_signal(const SpectralSignal& signal, const PointSample& sample) {
  if (!signal.manifold) throw std::invalid_argument("signal has no manifold");
  const auto& m = *signal.manifold;
  if (sample.intrinsic.cols() != m.dim())
    throw std::invalid_argument("sample does not match the signal's manifold");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sample.n());
  for (int i = 0; i < signal.coeffs.size(); ++i) {
    if (signal.coeffs[i] == 0.0) continue;
    out += signal.coeffs[i] * m.eigenfunction_values(i, sample);
  }
  return out;
}

SpectralSignal manifold_filter_apply(std::span<const double> taps, const SpectralSignal& signal,
                                     const Eigen::VectorXd& eigenvalues) {
  if (eigenvalues.size() < signal.coeffs.size())
    throw std::invalid_argument("eigenvalue list shorter than the signal bandwidth");
  SpectralSignal out;
  out.manifold = signal.manifold;
  out.coeffs.resize(signal.coeffs.size());
  FilterCoeffs f{{taps.begin(), taps.end()}, FilterBasis::Heat};
  for (int i = 0; i < signal.coeffs.size(); ++i)
    out.coeffs[i] = frequency_response(f, eigenvalues[i]) * signal.coeffs[i];
  return out;
}

SpectralSignal manifold_filter_apply(std::span<const double> taps, const SpectralSignal& signal) {
  if (!signal.manifold) throw std::invalid_argument("signal has no manifold");
  return manifold_filter_apply(taps, signal, signal.manifold->eigenvalues());
}

QuadratureRule make_quadrature(const ManifoldModel& manifold, int q) {
  if (q < 1) throw std::invalid_argument("quadrature size must be >= 1");
  QuadratureRule rule;
  if (manifold.kind() == ManifoldKind::Circle) {
    rule.nodes.points.resize(q, 2);
    rule.nodes.intrinsic.resize(q, 1);
    for (int j = 0; j < q; ++j) {
      double th = 2.0 * kPi * (j + 0.5) / q;
      rule.nodes.intrinsic(j, 0) = th;
      rule.nodes.points(j, 0) = std::cos(th);
      rule.nodes.points(j, 1) = std::sin(th);
    }
  } else {
    rule.nodes = sample_points(manifold, q, 0xC0FFEEULL);
  }
  rule.weights = Eigen::VectorXd::Constant(q, 1.0 / q);
  return rule;
}

SpectralSignal project_to_bandlimited(const ManifoldModel& manifold, const QuadratureRule& quad,
                                      const Eigen::VectorXd& values) {
  SpectralSignal out;
  out.manifold = &manifold;
  out.coeffs.resize(manifold.bandwidth());
  for (int i = 0; i < manifold.bandwidth(); ++i) {
    Eigen::VectorXd phi = manifold.eigenfunction_values(i, quad.nodes);
    out.coeffs[i] = (quad.weights.array() * phi.array() * values.array()).sum();
  }
  return out;
}

Eigen::MatrixXd mnn_forward(const GnnModel& model, const std::vector<SpectralSignal>& inputs,
                            const PointSample& eval_points, int quadrature_q) {
  if (model.basis() != FilterBasis::Heat)
    throw std::invalid_argument("mnn_forward requires the heat filter basis");
  if (inputs.empty() || !inputs.front().manifold)
    throw std::invalid_argument("mnn_forward needs at least one manifold signal");
  const ManifoldModel& manifold = *inputs.front().manifold;
  const int bw = manifold.bandwidth();
  if (static_cast<int>(inputs.size()) != model.feature_dims().front())
    throw std::invalid_argument("input feature count does not match the model");
  for (const auto& s : inputs)
    if (s.manifold != &manifold || s.coeffs.size() != bw)
      throw std::invalid_argument("inputs must share one manifold and bandwidth");

  if (quadrature_q == 0) quadrature_q = std::max(4096, 32 * bw);
  if (model.layers() > 1 && quadrature_q < 16 * bw)
    throw std::invalid_argument("quadrature underspecified for depth > 1");

  Eigen::MatrixXd coeffs(bw, inputs.size());
  for (int qf = 0; qf < static_cast<int>(inputs.size()); ++qf) coeffs.col(qf) = inputs[qf].coeffs;

  const Eigen::VectorXd& lambda = manifold.eigenvalues();
  QuadratureRule quad;  // built lazily, only needed between layers
  Eigen::MatrixXd quad_phi;
  auto node_values = [&](const PointSample& pts, const Eigen::MatrixXd& c) {
    Eigen::MatrixXd phi(pts.n(), bw);
    for (int i = 0; i < bw; ++i) phi.col(i) = manifold.eigenfunction_values(i, pts);
    return Eigen::MatrixXd(phi * c);
  };

  for (int layer = 0; layer < model.layers(); ++layer) {
    int f_out = model.feature_dims()[layer + 1];
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(bw, f_out);
    for (int k = 0; k < model.taps(); ++k) {
      Eigen::MatrixXd ck = (-static_cast<double>(k) * lambda.array()).exp().matrix().asDiagonal() *
                           coeffs;
      z += ck * model.tap(layer, k);
    }
    if (layer + 1 == model.layers()) {
      return activation_apply(model.activation(), Eigen::MatrixXd(node_values(eval_points, z)));
    }
    if (quad.nodes.n() == 0) quad = make_quadrature(manifold, quadrature_q);
    Eigen::MatrixXd vals = activation_apply(model.activation(), Eigen::MatrixXd(node_values(quad.nodes, z)));
    coeffs.resize(bw, f_out);
    for (int p = 0; p < f_out; ++p)
      coeffs.col(p) = project_to_bandlimited(manifold, quad, vals.col(p)).coeffs;
  }
  throw std::logic_error("unreachable");
}

}  // namespace mgnn
