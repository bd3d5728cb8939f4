#include "mgnn/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mgnn/graph.hpp"
#include "mgnn/parallel.hpp"

namespace mgnn {

TrainResult train(const GnnModel& init, const FilterOperator& op, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config) {
  if (config.lr <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");

  TrainResult result;
  result.model = init;
  result.loss_trace.reserve(config.epochs + 1);
  const std::vector<int>* rows = config.loss_rows.empty() ? nullptr : &config.loss_rows;
  // The input signal is fixed for the whole run; shift it once.
  Eigen::MatrixXd shifted0 = op.shifted(inputs, init.taps());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Eigen::MatrixXd pred = gnn_forward(result.model, op, inputs, nullptr, &shifted0,
                                       config.linear_output);
    double loss = loss_value(config.loss, pred, targets, rows);
    result.loss_trace.push_back(loss);
    if (!std::isfinite(loss)) {
      result.diverged = true;
      return result;
    }
    GnnGradient grads = gnn_gradient(result.model, op, inputs, targets, config.loss, &shifted0,
                                     config.linear_output, rows);
    bool keep_low_pass = result.model.basis() == FilterBasis::Heat && result.model.is_low_pass();
    for (int l = 0; l < result.model.layers(); ++l)
      for (int k = 0; k < result.model.taps(); ++k)
        result.model.tap(l, k) -= config.lr * grads[l][k];
    if (keep_low_pass) result.model.enforce_low_pass();
  }
  Eigen::MatrixXd pred = gnn_forward(result.model, op, inputs, nullptr, &shifted0,
                                     config.linear_output);
  double final_loss = loss_value(config.loss, pred, targets, rows);
  result.loss_trace.push_back(final_loss);
  if (!std::isfinite(final_loss)) result.diverged = true;
  return result;
}

RiskReport statistical_risk_mc(const GnnModel& model, const ManifoldModel& manifold,
                               const SpectralSignal& input, const SpectralSignal& target, int n,
                               int resamples, std::uint64_t seed, double eps_c, double empirical,
                               int jobs) {
  if (resamples < 1) throw std::invalid_argument("resamples must be >= 1");
  RiskReport report;
  report.empirical = empirical;
  report.resamples = resamples;
  report.resample_losses.assign(resamples, 0.0);
  std::vector<int> warnings(resamples, 0);

  const double eps = epsilon_schedule(n, manifold.dim(), eps_c);
  parallel_cells(resamples, jobs, [&](int r) {
    PointSample sample = sample_points(manifold, n, seed + static_cast<std::uint64_t>(r));
    EpsilonGraph graph = build_epsilon_graph(sample.points, manifold.dim(), eps);
    warnings[r] = graph.isolated_nodes > 0 ? 1 : 0;
    FilterOperator op = FilterOperator::matrix(graph.laplacian, model.basis());
    Eigen::MatrixXd x = evaluate_signal(input, sample);
    Eigen::MatrixXd y = evaluate_signal(target, sample);
    Eigen::MatrixXd pred = gnn_forward(model, op, x);
    report.resample_losses[r] = loss_value(LossKind::L2, pred, y);
  });
  double total = 0.0;
  for (double v : report.resample_losses) total += v;
  for (int w : warnings) report.graph_warnings += w;
  report.statistical_estimate = total / resamples;
  report.gap = generalization_gap(report.empirical, report.statistical_estimate);
  return report;
}

double generalization_gap(double empirical, double statistical) {
  return statistical - empirical;
}

namespace {
void write_value(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}
}  // namespace

void write_loss_trace_csv(const std::string& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << i << ',';
    write_value(out, trace[i]);
    out << '\n';
  }
}

void write_risk_report_csv(const std::string& path, const RiskReport& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "resample,loss\n";
  for (std::size_t i = 0; i < report.resample_losses.size(); ++i) {
    out << i << ',';
    write_value(out, report.resample_losses[i]);
    out << '\n';
  }
}

}  // namespace mgnn
