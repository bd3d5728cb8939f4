#include "mgnn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mgnn/graph.hpp"
#include "mgnn/parallel.hpp"
#include "mgnn/rng.hpp"
#include <json.hpp>

namespace mgnn {

void SweepConfig::validate() const {
  if (n_list.size() < 2) throw std::invalid_argument("n_list needs at least 2 entries");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("n_list must be strictly increasing");
  if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");
  if (bandwidth < 1) throw std::invalid_argument("bandwidth must be >= 1");
}

std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

LinearFit loglog_fit(const std::vector<std::pair<double, double>>& points) {
  LinearFit fit;
  std::vector<double> lx, ly;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      ++fit.n_dropped;
      continue;
    }
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  fit.n_points = static_cast<int>(lx.size());
  if (fit.n_points < 2) {
    fit.degenerate = true;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= fit.n_points;
  my /= fit.n_points;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < fit.n_points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx <= 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (auto r = pearson(lx, ly))
    fit.pearson = *r;
  else
    fit.degenerate = true;  // constant y: slope 0, correlation undefined
  char domain[96];
  std::snprintf(domain, sizeof domain, "log-log OLS over %d points", fit.n_points);
  fit.domain = domain;
  return fit;
}

void SweepReport::summarize(const std::vector<std::string>& fit_metrics) {
  summaries.clear();
  fits.clear();
  // Group by (metric, n); records are appended in deterministic cell order,
  // so a stable aggregation map is enough.
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& rec : records) groups[{rec.metric, rec.n}].push_back(rec.value);
  for (const auto& [key, values] : groups) {
    SummaryRow row;
    row.metric = key.first;
    row.n = key.second;
    row.count = static_cast<int>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    row.mean = sum / row.count;
    if (row.count > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - row.mean) * (v - row.mean);
      row.stderr_mean = std::sqrt(ss / (row.count - 1)) / std::sqrt(double(row.count));
    }
    summaries.push_back(std::move(row));
  }
  for (const auto& metric : fit_metrics) {
    std::vector<std::pair<double, double>> points;
    for (const auto& row : summaries)
      if (row.metric == metric) points.emplace_back(double(row.n), row.mean);
    fits[metric] = loglog_fit(points);
  }
}

std::vector<double> SweepReport::metric_means(const std::string& metric) const {
  std::vector<double> out;
  for (const auto& row : summaries)
    if (row.metric == metric) out.push_back(row.mean);
  return out;
}

std::vector<int> SweepReport::metric_ns(const std::string& metric) const {
  std::vector<int> out;
  for (const auto& row : summaries)
    if (row.metric == metric) out.push_back(row.n);
  return out;
}

namespace {

std::uint64_t cell_seed(const SweepConfig& config, int n, int seed_index) {
  return mix_seed(mix_seed(config.master_seed, static_cast<std::uint64_t>(n)),
                  static_cast<std::uint64_t>(seed_index));
}

// Single-feature filter bank: every layer applies the same scalar filter.
GnnModel chain_model(const FilterCoeffs& filter, int depth, Activation activation) {
  GnnModel model(std::vector<int>(depth + 1, 1), static_cast<int>(filter.taps.size()),
                 filter.basis, activation);
  for (int l = 0; l < depth; ++l)
    for (std::size_t k = 0; k < filter.taps.size(); ++k)
      model.tap(l, static_cast<int>(k))(0, 0) = filter.taps[k];
  return model;
}

SpectralSignal padded_signal(const ManifoldModel& manifold, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() > manifold.bandwidth())
    throw std::invalid_argument("coefficient vector exceeds the manifold bandwidth");
  SpectralSignal s;
  s.coeffs = Eigen::VectorXd::Zero(manifold.bandwidth());
  s.coeffs.head(coeffs.size()) = coeffs;
  s.manifold = &manifold;
  return s;
}

struct CellOutput {
  std::vector<CellRecord> records;
  int warnings = 0;
};

SweepReport merge_cells(std::vector<CellOutput>& cells) {
  SweepReport report;
  for (auto& cell : cells) {
    report.graph_warnings += cell.warnings;
    for (auto& rec : cell.records) report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace

ConvergenceReport run_spectrum_convergence(const SweepConfig& config) {
  config.validate();
  const int k = config.eigenpairs;
  if (k < 2) throw std::invalid_argument("eigenpairs must be >= 2");
  ManifoldModel manifold = make_manifold(config.manifold, std::max(k, config.bandwidth));
  const double c = config.epsilon_constant(manifold.dim());

  const int n_count = static_cast<int>(config.n_list.size());
  const int cell_count = n_count * config.seeds;
  std::vector<CellOutput> cells(cell_count);
  parallel_cells(cell_count, config.jobs, [&](int idx) {
    const int n = config.n_list[idx / config.seeds];
    const int s = idx % config.seeds;
    PointSample sample = sample_points(manifold, n, cell_seed(config, n, s));
    EpsilonGraph graph = build_epsilon_graph(sample.points, manifold.dim(),
                                             epsilon_schedule(n, manifold.dim(), c));
    SpectralDecomposition dec = eigendecompose(graph.laplacian, k);
    CellOutput& out = cells[idx];
    out.warnings = graph.isolated_nodes > 0 ? 1 : 0;

    double rel_sum = 0.0;
    char name[48];
    for (int j = 1; j < k; ++j) {
      const double analytic = manifold.eigenvalues()[j];
      const double rel = std::abs(analytic - dec.eigenvalues[j]) / analytic;
      rel_sum += rel;
      std::snprintf(name, sizeof name, "rel_error_i%d", j + 1);
      out.records.push_back({n, s, name, rel});
      std::snprintf(name, sizeof name, "lambda_i%d", j + 1);
      out.records.push_back({n, s, name, dec.eigenvalues[j]});
    }
    out.records.push_back({n, s, "spectrum_error", rel_sum / (k - 1)});

    // Projection residual of each discrete eigenvector onto the analytic
    // eigenspace its multiplet spans (rotation inside a multiplet is free).
    for (int j = 1; j < k; ++j) {
      auto [b, e] = manifold.multiplet(j);
      if (e > k) continue;  // truncated group; no complete subspace to test
      const int g = e - b;
      Eigen::MatrixXd basis(sample.n(), g);
      for (int i = b; i < e; ++i)
        basis.col(i - b) = manifold.eigenfunction_values(i, sample);
      Eigen::MatrixXd gram = basis.transpose() * basis / double(sample.n());
      Eigen::VectorXd v = dec.eigenvectors.col(j);
      Eigen::VectorXd coeffs = gram.ldlt().solve(basis.transpose() * v / double(sample.n()));
      double resid = discrete_norm(v - basis * coeffs);
      std::snprintf(name, sizeof name, "subspace_dist_i%d", j + 1);
      out.records.push_back({n, s, name, resid});
    }
  });
  SweepReport report = merge_cells(cells);
  report.summarize({"spectrum_error"});
  return report;
}

ConvergenceReport run_output_convergence(const SweepConfig& config, int depth) {
  config.validate();
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (config.filter.basis != FilterBasis::Heat)
    throw std::invalid_argument("output convergence compares heat-basis filters");
  ManifoldModel manifold = make_manifold(config.manifold, config.bandwidth);
  SpectralSignal f = padded_signal(manifold, config.input_coeffs);
  GnnModel model = chain_model(config.filter, depth, config.activation);
  SpectralSignal filtered = manifold_filter_apply(config.filter.taps, f);
  const double c = config.epsilon_constant(manifold.dim());

  const int cell_count = static_cast<int>(config.n_list.size()) * config.seeds;
  std::vector<CellOutput> cells(cell_count);
  parallel_cells(cell_count, config.jobs, [&](int idx) {
    const int n = config.n_list[idx / config.seeds];
    const int s = idx % config.seeds;
    PointSample sample = sample_points(manifold, n, cell_seed(config, n, s));
    EpsilonGraph graph = build_epsilon_graph(sample.points, manifold.dim(),
                                             epsilon_schedule(n, manifold.dim(), c));
    FilterOperator op = FilterOperator::matrix(graph.laplacian, FilterBasis::Heat);
    Eigen::MatrixXd x = evaluate_signal(f, sample);

    Eigen::MatrixXd gnn = gnn_forward(model, op, x);
    Eigen::MatrixXd mnn = mnn_forward(model, {f}, sample);
    double gnn_error = discrete_norm(gnn.col(0) - mnn.col(0));

    Eigen::VectorXd graph_filtered = Eigen::VectorXd::Zero(sample.n());
    for (std::size_t t = 0; t < config.filter.taps.size(); ++t)
      graph_filtered += config.filter.taps[t] * op.apply(x, static_cast<int>(t));
    double filter_error =
        discrete_norm(graph_filtered - evaluate_signal(filtered, sample));

    CellOutput& out = cells[idx];
    out.warnings = graph.isolated_nodes > 0 ? 1 : 0;
    out.records.push_back({n, s, "gnn_error", gnn_error});
    out.records.push_back({n, s, "filter_error", filter_error});
  });
  SweepReport report = merge_cells(cells);
  report.summarize({"gnn_error", "filter_error"});
  return report;
}

ConvergenceReport run_sampling_consistency(const SweepConfig& config) {
  config.validate();
  ManifoldModel manifold = make_manifold(config.manifold, config.bandwidth);
  SpectralSignal f = padded_signal(manifold, config.input_coeffs);

  const int cell_count = static_cast<int>(config.n_list.size()) * config.seeds;
  std::vector<CellOutput> cells(cell_count);
  parallel_cells(cell_count, config.jobs, [&](int idx) {
    const int n = config.n_list[idx / config.seeds];
    const int s = idx % config.seeds;
    PointSample sample = sample_points(manifold, n, cell_seed(config, n, s));
    Eigen::VectorXd x = evaluate_signal(f, sample);
    double err_sum = 0.0;
    for (int i = 0; i < manifold.bandwidth(); ++i) {
      Eigen::VectorXd phi = manifold.eigenfunction_values(i, sample);
      err_sum += std::abs(discrete_inner_product(x, phi) - f.coeffs[i]);
    }
    cells[idx].records.push_back({n, s, "consistency_error", err_sum / manifold.bandwidth()});
  });
  SweepReport report = merge_cells(cells);
  report.summarize({"consistency_error"});
  return report;
}

LinearFit check_weyl(const ManifoldModel& manifold, int count) {
  if (count < 8) throw std::invalid_argument("count must be >= 8");
  if (manifold.eigenvalues().size() < count)
    throw std::invalid_argument("manifold carries fewer eigenvalues than requested");
  std::vector<std::pair<double, double>> points;
  for (int i = std::max(1, count / 4); i <= count; ++i)
    points.emplace_back(double(i), manifold.eigenvalues()[i - 1]);
  return loglog_fit(points);
}

GapReport run_gap_sweep_synthetic(const SweepConfig& config) {
  config.validate();
  if (config.target_coeffs.size() == 0)
    throw std::invalid_argument("gap sweep needs target coefficients");
  ManifoldModel manifold = make_manifold(config.manifold, config.bandwidth);
  SpectralSignal f = padded_signal(manifold, config.input_coeffs);
  SpectralSignal g = padded_signal(manifold, config.target_coeffs);
  const double c = config.epsilon_constant(manifold.dim());
  GnnModel init({1, 1}, config.taps, FilterBasis::Polynomial, Activation::Identity);

  const int cell_count = static_cast<int>(config.n_list.size()) * config.seeds;
  std::vector<CellOutput> cells(cell_count);
  parallel_cells(cell_count, config.jobs, [&](int idx) {
    const int n = config.n_list[idx / config.seeds];
    const int s = idx % config.seeds;
    const std::uint64_t seed = cell_seed(config, n, s);
    PointSample sample = sample_points(manifold, n, seed);
    EpsilonGraph graph = build_epsilon_graph(sample.points, manifold.dim(),
                                             epsilon_schedule(n, manifold.dim(), c));
    FilterOperator op = FilterOperator::matrix(graph.laplacian, FilterBasis::Polynomial);
    Eigen::MatrixXd x = evaluate_signal(f, sample);
    Eigen::MatrixXd y = evaluate_signal(g, sample);

    TrainConfig tc;
    tc.lr = config.lr;
    tc.epochs = config.epochs;
    tc.seed = seed;
    tc.loss = LossKind::L2;
    TrainResult trained = train(init, op, x, y, tc);
    double empirical = trained.loss_trace.back();
    RiskReport risk = statistical_risk_mc(trained.model, manifold, f, g, n, config.resamples,
                                          seed, c, empirical);

    CellOutput& out = cells[idx];
    out.warnings = (graph.isolated_nodes > 0 ? 1 : 0) + risk.graph_warnings;
    out.records.push_back({n, s, "empirical_risk", empirical});
    out.records.push_back({n, s, "statistical_risk", risk.statistical_estimate});
    out.records.push_back({n, s, "gap", risk.gap});
    out.records.push_back({n, s, "gap_abs", std::abs(risk.gap)});
  });
  SweepReport report = merge_cells(cells);
  report.summarize({"gap_abs"});
  return report;
}

namespace {
void write_value(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_records_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "N,seed,metric,value\n";
  for (const auto& rec : report.records) {
    out << rec.n << ',' << rec.seed << ',' << rec.metric << ',';
    write_value(out, rec.value);
    out << '\n';
  }
}

void write_summary_csv(const std::string& path, const SweepReport& report,
                       const std::string& metric) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "N,mean,stderr\n";
  for (const auto& row : report.summaries) {
    if (row.metric != metric) continue;
    out << row.n << ',';
    write_value(out, row.mean);
    out << ',';
    write_value(out, row.stderr_mean);
    out << '\n';
  }
}

void write_fits_json(const std::string& path, const SweepReport& report) {
  nlohmann::json j;
  for (const auto& [metric, fit] : report.fits) {
    j[metric] = {{"slope", fit.slope},       {"intercept", fit.intercept},
                 {"pearson", fit.pearson},   {"n_points", fit.n_points},
                 {"n_dropped", fit.n_dropped}, {"degenerate", fit.degenerate},
                 {"domain", fit.domain}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace mgnn
