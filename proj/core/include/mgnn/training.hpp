#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgnn/filters.hpp"
#include "mgnn/manifold.hpp"

namespace mgnn {

/// Plain full-batch SGD, no weight decay, last-iterate model.
struct TrainConfig {
  double lr = 0.005;
  int epochs = 1000;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::L2;
  bool linear_output = false;  // skip the activation on the last layer (classifiers)
  std::vector<int> loss_rows;  // empty = every node; else transductive mask
};

struct TrainResult {
  GnnModel model;
  std::vector<double> loss_trace;  // loss at the start of each epoch, plus final
  bool diverged = false;
};

TrainResult train(const GnnModel& init, const FilterOperator& op, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, const TrainConfig& config);

struct RiskReport {
  double empirical = 0.0;
  double statistical_estimate = 0.0;
  std::vector<double> resample_losses;
  double gap = 0.0;  // statistical - empirical, signed
  int resamples = 0;
  int graph_warnings = 0;  // resamples whose graph had isolated nodes
};

/// Monte-Carlo estimate of the statistical risk: R fresh point samples of
/// size n, each with its own epsilon-graph, evaluated under the trained
/// model. Resample r uses seed `seed + r`, so R=1 with the training seed
/// reproduces the training graph exactly.
RiskReport statistical_risk_mc(const GnnModel& model, const ManifoldModel& manifold,
                               const SpectralSignal& input, const SpectralSignal& target, int n,
                               int resamples, std::uint64_t seed, double eps_c, double empirical,
                               int jobs = 1);

double generalization_gap(double empirical, double statistical);

void write_loss_trace_csv(const std::string& path, const std::vector<double>& trace);
void write_risk_report_csv(const std::string& path, const RiskReport& report);

}  // namespace mgnn
