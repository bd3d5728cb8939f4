// mgnn-lab: experiment driver. Every run writes a manifest.json with the
// fully resolved configuration; re-running with `--config manifest.json`
// reproduces the CSV outputs byte for byte.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mgnn/datasets.hpp"
#include "mgnn/experiments.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 3;   // invalid configuration value
constexpr int kExitMissing = 4;  // input file not found / unreadable
constexpr int kExitOutput = 5;   // output directory not writable
constexpr int kExitRun = 6;      // experiment failed

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;
};

std::string default_out_dir() {
  const char* env = std::getenv("MGNN_OUT_DIR");
  return env && *env ? env : ".";
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "JSON config; explicit flags override fields");
  cmd->add_option("-o,--out", opts.out_dir, "output directory (default $MGNN_OUT_DIR or .)");
  cmd->add_option("-j,--jobs", opts.jobs, "worker threads (default 1, deterministic baseline)");
  cmd->add_option("--seed", opts.seed, "master seed");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j;
  in >> j;
  return j;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream probe(fs::path(dir) / ".write_probe");
  if (!probe) throw std::runtime_error("output directory not writable: " + dir);
  probe.close();
  fs::remove(fs::path(dir) / ".write_probe", ec);
}

void write_manifest(const std::string& dir, const json& manifest) {
  std::ofstream out(fs::path(dir) / "manifest.json");
  out << manifest.dump(2) << '\n';
}

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}
Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Flag values win over config-file values; CLI11 tells us which flags the
// user actually passed.
template <typename T>
void resolve(const CLI::App* cmd, const std::string& flag, const json& cfg,
             const std::string& key, T& value) {
  if (cmd->count(flag) > 0) return;
  if (cfg.contains(key)) value = cfg.at(key).get<T>();
}

json sweep_manifest(const std::string& command, const mgnn::SweepConfig& c) {
  return json{{"command", command},
              {"manifold", c.manifold == mgnn::ManifoldKind::Circle ? "circle" : "sphere"},
              {"n_list", c.n_list},
              {"seeds", c.seeds},
              {"master_seed", c.master_seed},
              {"eps_c", c.eps_c},
              {"jobs", c.jobs},
              {"bandwidth", c.bandwidth},
              {"eigenpairs", c.eigenpairs},
              {"input_coeffs", to_vector(c.input_coeffs)},
              {"target_coeffs", to_vector(c.target_coeffs)},
              {"filter_taps", c.filter.taps},
              {"filter_basis", mgnn::to_string(c.filter.basis)},
              {"activation", mgnn::to_string(c.activation)},
              {"taps", c.taps},
              {"lr", c.lr},
              {"epochs", c.epochs},
              {"resamples", c.resamples}};
}

void apply_sweep_config(const CLI::App* cmd, const json& cfg, const CommonOpts& common,
                        mgnn::SweepConfig& c, std::string& manifold_name) {
  resolve(cmd, "--manifold", cfg, "manifold", manifold_name);
  resolve(cmd, "--n", cfg, "n_list", c.n_list);
  resolve(cmd, "--seeds", cfg, "seeds", c.seeds);
  resolve(cmd, "--eps-c", cfg, "eps_c", c.eps_c);
  resolve(cmd, "--bandwidth", cfg, "bandwidth", c.bandwidth);
  resolve(cmd, "--k", cfg, "eigenpairs", c.eigenpairs);
  resolve(cmd, "--lr", cfg, "lr", c.lr);
  resolve(cmd, "--epochs", cfg, "epochs", c.epochs);
  resolve(cmd, "--taps", cfg, "taps", c.taps);
  resolve(cmd, "--resamples", cfg, "resamples", c.resamples);
  if (cmd->count("--seed") == 0 && cfg.contains("master_seed"))
    c.master_seed = cfg.at("master_seed").get<std::uint64_t>();
  else
    c.master_seed = common.seed;
  if (cmd->count("--jobs") == 0 && cfg.contains("jobs"))
    c.jobs = cfg.at("jobs").get<int>();
  else
    c.jobs = common.jobs;
  if (cfg.contains("filter_taps")) c.filter.taps = cfg.at("filter_taps").get<std::vector<double>>();
  if (cfg.contains("filter_basis"))
    c.filter.basis = mgnn::filter_basis_from_string(cfg.at("filter_basis").get<std::string>());
  if (cfg.contains("activation"))
    c.activation = mgnn::activation_from_string(cfg.at("activation").get<std::string>());
  if (cfg.contains("input_coeffs"))
    c.input_coeffs = to_eigen(cfg.at("input_coeffs").get<std::vector<double>>());
  if (cfg.contains("target_coeffs"))
    c.target_coeffs = to_eigen(cfg.at("target_coeffs").get<std::vector<double>>());
  c.manifold = manifold_name == "sphere" ? mgnn::ManifoldKind::Sphere : mgnn::ManifoldKind::Circle;
  if (manifold_name != "circle" && manifold_name != "sphere")
    throw std::invalid_argument("manifold must be circle or sphere");
}

void emit_sweep(const std::string& dir, const std::string& stem, const mgnn::SweepReport& report,
                const std::vector<std::string>& summary_metrics, const json& manifest) {
  mgnn::write_records_csv((fs::path(dir) / (stem + ".csv")).string(), report);
  for (const auto& metric : summary_metrics)
    mgnn::write_summary_csv((fs::path(dir) / (stem + "_" + metric + "_summary.csv")).string(),
                            report, metric);
  mgnn::write_fits_json((fs::path(dir) / "fit.json").string(), report);
  write_manifest(dir, manifest);
  for (const auto& [metric, fit] : report.fits)
    std::printf("%s: slope %.4f intercept %.4f pearson %.4f (%d points, %d dropped)\n",
                metric.c_str(), fit.slope, fit.intercept, fit.pearson, fit.n_points,
                fit.n_dropped);
  if (report.graph_warnings > 0)
    std::printf("warning: %d cells had graphs with isolated nodes\n", report.graph_warnings);
}

int run_fit(const std::string& in_path, const std::string& x_col, const std::string& y_col) {
  std::ifstream in(in_path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open %s\n", in_path.c_str());
    return kExitMissing;
  }
  std::string line;
  if (!std::getline(in, line)) {
    std::fprintf(stderr, "error: %s is empty\n", in_path.c_str());
    return kExitMissing;
  }
  std::vector<std::string> header;
  std::stringstream hs(line);
  std::string field;
  while (std::getline(hs, field, ',')) header.push_back(field);
  int xi = -1, yi = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == x_col) xi = static_cast<int>(i);
    if (header[i] == y_col) yi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0) {
    std::fprintf(stderr, "error: columns %s,%s not found in %s\n", x_col.c_str(), y_col.c_str(),
                 in_path.c_str());
    return kExitConfig;
  }
  std::vector<std::pair<double, double>> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) <= std::max(xi, yi)) continue;
    points.emplace_back(std::stod(fields[xi]), std::stod(fields[yi]));
  }
  mgnn::LinearFit fit = mgnn::loglog_fit(points);
  if (fit.degenerate) {
    std::printf("degenerate fit (%d usable points, %d dropped)\n", fit.n_points, fit.n_dropped);
    return 0;
  }
  std::printf("slope %.6f intercept %.6f pearson %.6f (%d points, %d dropped)\n", fit.slope,
              fit.intercept, fit.pearson, fit.n_points, fit.n_dropped);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epsilon-graph / manifold-limit GNN laboratory"};
  app.require_subcommand(1);

  // --- shared option storage per subcommand ---
  struct SweepCmd {
    CLI::App* cmd = nullptr;
    CommonOpts common;
    std::string manifold = "circle";
    mgnn::SweepConfig config;
  };
  auto add_sweep_flags = [&](CLI::App* cmd, SweepCmd& sc) {
    sc.cmd = cmd;
    add_common(cmd, sc.common);
    cmd->add_option("--manifold", sc.manifold, "circle | sphere");
    cmd->add_option("--n", sc.config.n_list, "graph sizes")->delimiter(',');
    cmd->add_option("--seeds", sc.config.seeds, "samples per N");
    cmd->add_option("--eps-c", sc.config.eps_c, "epsilon schedule constant (0 = default)");
    cmd->add_option("--bandwidth", sc.config.bandwidth, "signal bandwidth M");
    cmd->add_option("--k", sc.config.eigenpairs, "eigenpairs K");
    cmd->add_option("--lr", sc.config.lr, "learning rate");
    cmd->add_option("--epochs", sc.config.epochs, "training epochs");
    cmd->add_option("--taps", sc.config.taps, "trained filter taps");
    cmd->add_option("--resamples", sc.config.resamples, "Monte-Carlo resamples R");
  };

  SweepCmd spectrum, converge, sampling, gap_syn;
  int converge_depth = 1;

  add_sweep_flags(app.add_subcommand("spectrum", "graph vs analytic Laplacian spectra"),
                  spectrum);
  spectrum.config.n_list = {250, 500, 1000, 2000};
  spectrum.config.eigenpairs = 9;

  add_sweep_flags(app.add_subcommand("converge", "GNN vs manifold-limit output error"), converge);
  converge.cmd->add_option("--depth", converge_depth, "GNN depth");
  converge.config.n_list = {125, 250, 500, 1000, 2000};
  converge.config.input_coeffs = to_eigen({0.5, 1.0, -0.7, 0.3, 0.2});

  add_sweep_flags(app.add_subcommand("sampling", "inner-product sampling consistency"), sampling);
  sampling.config.n_list = {125, 250, 500, 1000, 2000};
  sampling.config.input_coeffs = to_eigen({0.5, 1.0, -0.7, 0.3, 0.2});

  add_sweep_flags(
      app.add_subcommand("gap-synthetic", "generalization gap sweep, synthetic regression"),
      gap_syn);
  gap_syn.config.n_list = {64, 128, 256, 512, 1024, 2048};
  gap_syn.config.seeds = 5;
  gap_syn.config.input_coeffs = to_eigen({1.0, 1.0, 1.0, 1.0, 1.0});
  gap_syn.config.target_coeffs = to_eigen({0.5, 1.2, -0.3, 0.8, 0.1});
  gap_syn.config.lr = 0.05;
  gap_syn.config.epochs = 800;

  // weyl
  CommonOpts weyl_common;
  std::string weyl_manifold = "circle";
  int weyl_count = 100;
  CLI::App* weyl_cmd = app.add_subcommand("weyl", "eigenvalue growth exponent");
  add_common(weyl_cmd, weyl_common);
  weyl_cmd->add_option("--manifold", weyl_manifold, "circle | sphere");
  weyl_cmd->add_option("--count", weyl_count, "number of analytic eigenvalues");

  // gap-dataset
  CommonOpts ds_common;
  mgnn::DatasetSweepConfig ds_config;
  ds_config.n_list = {270, 410, 620, 940, 1420, 2100};
  std::string ds_content, ds_cites;
  CLI::App* ds_cmd = app.add_subcommand("gap-dataset", "transductive gap sweep on Cora");
  add_common(ds_cmd, ds_common);
  ds_cmd->add_option("--content", ds_content, "cora.content path");
  ds_cmd->add_option("--cites", ds_cites, "cora.cites path");
  ds_cmd->add_option("--n", ds_config.n_list, "train-set sizes")->delimiter(',');
  ds_cmd->add_option("--trials", ds_config.trials, "trials per N");
  ds_cmd->add_option("--hidden", ds_config.hidden, "hidden width");
  ds_cmd->add_option("--taps", ds_config.taps, "filter taps");
  ds_cmd->add_option("--lr", ds_config.lr, "learning rate");
  ds_cmd->add_option("--epochs", ds_config.epochs, "training epochs");
  ds_cmd->add_option("--init-scale", ds_config.init_scale, "init scale");
  ds_cmd->add_flag("--full-graph", ds_config.full_graph_propagation,
                   "propagate on the full graph, mask the loss");
  ds_cmd->add_flag("--normalized", ds_config.normalized_laplacian,
                   "use the degree-normalized Laplacian");

  // fit
  std::string fit_in, fit_x = "N", fit_y = "mean";
  CLI::App* fit_cmd = app.add_subcommand("fit", "log-log fit of two CSV columns");
  fit_cmd->add_option("--in", fit_in, "input CSV")->required();
  fit_cmd->add_option("--x", fit_x, "x column name");
  fit_cmd->add_option("--y", fit_y, "y column name");

  CLI11_PARSE(app, argc, argv);

  try {
    auto run_sweep = [&](SweepCmd& sc, const std::string& name,
                         auto&& runner, const std::vector<std::string>& metrics) -> int {
      json cfg;
      if (!sc.common.config_path.empty()) cfg = load_config(sc.common.config_path);
      apply_sweep_config(sc.cmd, cfg, sc.common, sc.config, sc.manifold);
      std::string out = !sc.common.out_dir.empty() ? sc.common.out_dir
                        : cfg.contains("out_dir")  ? cfg.at("out_dir").get<std::string>()
                                                   : default_out_dir();
      ensure_out_dir(out);
      mgnn::SweepReport report = runner(sc.config);
      json manifest = sweep_manifest(name, sc.config);
      manifest["out_dir"] = out;
      emit_sweep(out, name, report, metrics, manifest);
      return 0;
    };

    if (spectrum.cmd->parsed())
      return run_sweep(spectrum, "spectrum",
                       [](const mgnn::SweepConfig& c) { return mgnn::run_spectrum_convergence(c); },
                       {"spectrum_error"});
    if (converge.cmd->parsed())
      return run_sweep(converge, "converge",
                       [&](const mgnn::SweepConfig& c) {
                         return mgnn::run_output_convergence(c, converge_depth);
                       },
                       {"gnn_error", "filter_error"});
    if (sampling.cmd->parsed())
      return run_sweep(sampling, "sampling",
                       [](const mgnn::SweepConfig& c) { return mgnn::run_sampling_consistency(c); },
                       {"consistency_error"});
    if (gap_syn.cmd->parsed())
      return run_sweep(gap_syn, "gap",
                       [](const mgnn::SweepConfig& c) { return mgnn::run_gap_sweep_synthetic(c); },
                       {"gap_abs"});

    if (weyl_cmd->parsed()) {
      json cfg;
      if (!weyl_common.config_path.empty()) cfg = load_config(weyl_common.config_path);
      resolve(weyl_cmd, "--manifold", cfg, "manifold", weyl_manifold);
      resolve(weyl_cmd, "--count", cfg, "count", weyl_count);
      std::string out = !weyl_common.out_dir.empty() ? weyl_common.out_dir
                        : cfg.contains("out_dir")    ? cfg.at("out_dir").get<std::string>()
                                                     : default_out_dir();
      ensure_out_dir(out);
      mgnn::ManifoldKind kind = weyl_manifold == "sphere" ? mgnn::ManifoldKind::Sphere
                                                          : mgnn::ManifoldKind::Circle;
      mgnn::ManifoldModel manifold = mgnn::make_manifold(kind, weyl_count);
      mgnn::LinearFit fit = mgnn::check_weyl(manifold, weyl_count);
      std::ofstream csv(fs::path(out) / "weyl.csv");
      csv << "index,eigenvalue\n";
      for (int i = 1; i <= weyl_count; ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", i, manifold.eigenvalues()[i - 1]);
        csv << buf;
      }
      json sidecar{{"exponent", {{"slope", fit.slope},
                                 {"intercept", fit.intercept},
                                 {"pearson", fit.pearson},
                                 {"n_points", fit.n_points},
                                 {"n_dropped", fit.n_dropped}}}};
      std::ofstream fj(fs::path(out) / "fit.json");
      fj << sidecar.dump(2) << '\n';
      write_manifest(out, json{{"command", "weyl"},
                               {"manifold", weyl_manifold},
                               {"count", weyl_count},
                               {"out_dir", out}});
      std::printf("exponent %.4f pearson %.4f\n", fit.slope, fit.pearson);
      return 0;
    }

    if (ds_cmd->parsed()) {
      json cfg;
      if (!ds_common.config_path.empty()) cfg = load_config(ds_common.config_path);
      resolve(ds_cmd, "--content", cfg, "content", ds_content);
      resolve(ds_cmd, "--cites", cfg, "cites", ds_cites);
      resolve(ds_cmd, "--n", cfg, "n_list", ds_config.n_list);
      resolve(ds_cmd, "--trials", cfg, "trials", ds_config.trials);
      resolve(ds_cmd, "--hidden", cfg, "hidden", ds_config.hidden);
      resolve(ds_cmd, "--taps", cfg, "taps", ds_config.taps);
      resolve(ds_cmd, "--lr", cfg, "lr", ds_config.lr);
      resolve(ds_cmd, "--epochs", cfg, "epochs", ds_config.epochs);
      resolve(ds_cmd, "--init-scale", cfg, "init_scale", ds_config.init_scale);
      if (ds_cmd->count("--full-graph") == 0 && cfg.contains("full_graph"))
        ds_config.full_graph_propagation = cfg.at("full_graph").get<bool>();
      if (ds_cmd->count("--normalized") == 0 && cfg.contains("normalized_laplacian"))
        ds_config.normalized_laplacian = cfg.at("normalized_laplacian").get<bool>();
      if (ds_cmd->count("--seed") == 0 && cfg.contains("master_seed"))
        ds_config.master_seed = cfg.at("master_seed").get<std::uint64_t>();
      else
        ds_config.master_seed = ds_common.seed;
      if (ds_cmd->count("--jobs") == 0 && cfg.contains("jobs"))
        ds_config.jobs = cfg.at("jobs").get<int>();
      else
        ds_config.jobs = ds_common.jobs;
      if (ds_content.empty() || ds_cites.empty()) {
        std::fprintf(stderr, "error: --content and --cites are required\n");
        return kExitMissing;
      }
      if (!fs::exists(ds_content) || !fs::exists(ds_cites)) {
        std::fprintf(stderr, "error: dataset files not found: %s / %s\n", ds_content.c_str(),
                     ds_cites.c_str());
        return kExitMissing;
      }
      std::string out = !ds_common.out_dir.empty() ? ds_common.out_dir
                        : cfg.contains("out_dir")  ? cfg.at("out_dir").get<std::string>()
                                                   : default_out_dir();
      ensure_out_dir(out);
      mgnn::NodeClassificationDataset dataset = mgnn::load_cora(ds_content, ds_cites);
      mgnn::l1_normalize_features(dataset);
      mgnn::GapReport report = mgnn::run_gap_sweep_dataset(dataset, ds_config);
      json manifest{{"command", "gap-dataset"}, {"content", ds_content},
                    {"cites", ds_cites},        {"n_list", ds_config.n_list},
                    {"trials", ds_config.trials}, {"hidden", ds_config.hidden},
                    {"taps", ds_config.taps},   {"lr", ds_config.lr},
                    {"epochs", ds_config.epochs}, {"init_scale", ds_config.init_scale},
                    {"full_graph", ds_config.full_graph_propagation},
                    {"normalized_laplacian", ds_config.normalized_laplacian},
                    {"master_seed", ds_config.master_seed}, {"jobs", ds_config.jobs},
                    {"out_dir", out}};
      emit_sweep(out, "dataset_gap", report, {"acc_gap_abs", "loss_gap_abs"}, manifest);
      return 0;
    }

    if (fit_cmd->parsed()) return run_fit(fit_in, fit_x, fit_y);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRun;
  }
  return 0;
}
