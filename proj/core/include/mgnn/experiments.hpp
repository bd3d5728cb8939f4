#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mgnn/filters.hpp"
#include "mgnn/manifold.hpp"
#include "mgnn/training.hpp"

namespace mgnn {

/// One sweep over graph sizes; each field is read by the experiments that
/// need it and ignored by the rest.
struct SweepConfig {
  ManifoldKind manifold = ManifoldKind::Circle;
  std::vector<int> n_list;          // strictly increasing, >= 2 entries
  int seeds = 10;                   // independent samples per N
  std::uint64_t master_seed = 0;
  double eps_c = 0.0;               // 0 -> default for the manifold dimension
  int jobs = 1;

  int bandwidth = 5;                // M
  int eigenpairs = 9;               // K, spectrum convergence
  Eigen::VectorXd input_coeffs;     // fhat
  Eigen::VectorXd target_coeffs;    // ghat, gap sweep only
  FilterCoeffs filter{{0.0, 1.0}, FilterBasis::Heat};
  Activation activation = Activation::Relu;

  // Gap sweep training knobs.
  int taps = 5;
  double lr = 0.05;
  int epochs = 800;
  int resamples = 50;

  double epsilon_constant(int d) const { return eps_c > 0.0 ? eps_c : (d == 1 ? 1.5 : 1.0); }
  void validate() const;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson = 0.0;
  int n_points = 0;
  int n_dropped = 0;      // nonpositive values excluded from the log transform
  bool degenerate = false;  // fewer than 2 usable points or zero variance
  std::string domain;
};

/// OLS of log y on log x; drops pairs with nonpositive coordinates.
LinearFit loglog_fit(const std::vector<std::pair<double, double>>& points);
/// Pearson correlation; nullopt when either sequence has zero variance.
std::optional<double> pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct CellRecord {
  int n = 0;
  int seed = 0;
  std::string metric;
  double value = 0.0;
};

struct SummaryRow {
  int n = 0;
  std::string metric;
  double mean = 0.0;
  double stderr_mean = 0.0;
  int count = 0;
};

/// Raw per-(N, seed, metric) records plus seed-averaged summaries and
/// log-log fits of the per-N means. Aggregates are always recomputable
/// from the records (summarize() does exactly that).
struct SweepReport {
  std::vector<CellRecord> records;
  std::vector<SummaryRow> summaries;
  std::map<std::string, LinearFit> fits;
  int graph_warnings = 0;

  void summarize(const std::vector<std::string>& fit_metrics = {});
  std::vector<double> metric_means(const std::string& metric) const;  // ordered by N
  std::vector<int> metric_ns(const std::string& metric) const;
};

using ConvergenceReport = SweepReport;
using GapReport = SweepReport;

/// Discrete vs analytic spectra: relative eigenvalue errors for i >= 2 and
/// projection residuals of discrete eigenvectors onto tied analytic
/// eigenspaces. Metrics: rel_error_i<j>, lambda_i<j>, subspace_dist_i<j>,
/// spectrum_error (mean relative error over j = 2..K).
ConvergenceReport run_spectrum_convergence(const SweepConfig& config);

/// ||GNN(L_N, P_N f) - P_N MNN(f)||_N for a shared heat-basis filter bank,
/// at the given depth. Metrics: gnn_error and filter_error (no activation).
ConvergenceReport run_output_convergence(const SweepConfig& config, int depth = 1);

/// |<P_N f, P_N phi_i>_N - fhat_i| averaged over i <= M. Metric:
/// consistency_error.
ConvergenceReport run_sampling_consistency(const SweepConfig& config);

/// Regression of log lambda_i on log i over i in [count/4, count].
LinearFit check_weyl(const ManifoldModel& manifold, int count);

/// Train-vs-statistical-risk sweep on a synthetic regression task. Metrics:
/// empirical_risk, statistical_risk, gap (signed), gap_abs.
GapReport run_gap_sweep_synthetic(const SweepConfig& config);

void write_records_csv(const std::string& path, const SweepReport& report);
void write_summary_csv(const std::string& path, const SweepReport& report,
                       const std::string& metric);
void write_fits_json(const std::string& path, const SweepReport& report);

}  // namespace mgnn
