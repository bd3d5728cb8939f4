#include "mgnn/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mgnn/parallel.hpp"
#include "mgnn/rng.hpp"

namespace mgnn {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, '\t')) fields.push_back(field);
  return fields;
}

[[noreturn]] void malformed(const std::string& path, int line_no, const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

NodeClassificationDataset load_cora(const std::string& content_path,
                                    const std::string& cites_path) {
  std::ifstream content(content_path);
  if (!content) throw std::runtime_error("cannot open " + content_path);

  NodeClassificationDataset ds;
  std::vector<std::vector<double>> feature_rows;
  std::vector<std::string> raw_classes;
  std::map<std::string, int> id_index;
  std::string line;
  int line_no = 0;
  std::size_t n_features = 0;
  while (std::getline(content, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() < 3) malformed(content_path, line_no, "expected id, features, class");
    if (n_features == 0) n_features = fields.size() - 2;
    if (fields.size() != n_features + 2)
      malformed(content_path, line_no, "inconsistent field count");
    if (id_index.count(fields.front()))
      malformed(content_path, line_no, "duplicate node id " + fields.front());
    id_index[fields.front()] = static_cast<int>(ds.node_ids.size());
    ds.node_ids.push_back(fields.front());
    std::vector<double> row(n_features);
    for (std::size_t i = 0; i < n_features; ++i) {
      try {
        std::size_t used = 0;
        row[i] = std::stod(fields[i + 1], &used);
        if (used != fields[i + 1].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        malformed(content_path, line_no, "bad feature value '" + fields[i + 1] + "'");
      }
    }
    feature_rows.push_back(std::move(row));
    raw_classes.push_back(fields.back());
  }
  if (ds.node_ids.empty()) throw std::runtime_error(content_path + ": no rows");

  ds.features.resize(ds.n(), static_cast<int>(n_features));
  for (int r = 0; r < ds.n(); ++r)
    for (std::size_t c = 0; c < n_features; ++c) ds.features(r, static_cast<int>(c)) = feature_rows[r][c];

  std::set<std::string> class_set(raw_classes.begin(), raw_classes.end());
  ds.class_names.assign(class_set.begin(), class_set.end());  // sorted by std::set
  std::map<std::string, int> class_index;
  for (int i = 0; i < ds.class_count(); ++i) class_index[ds.class_names[i]] = i;
  ds.labels.resize(ds.n());
  for (int r = 0; r < ds.n(); ++r) ds.labels[r] = class_index[raw_classes[r]];

  std::ifstream cites(cites_path);
  if (!cites) throw std::runtime_error("cannot open " + cites_path);
  std::set<std::pair<int, int>> edge_set;
  line_no = 0;
  while (std::getline(cites, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 2) malformed(cites_path, line_no, "expected two node ids");
    auto a = id_index.find(fields[0]);
    auto b = id_index.find(fields[1]);
    if (a == id_index.end() || b == id_index.end()) {
      ++ds.unknown_endpoints_skipped;
      continue;
    }
    if (a->second == b->second) {
      ++ds.self_edges_removed;
      continue;
    }
    std::pair<int, int> e{std::min(a->second, b->second), std::max(a->second, b->second)};
    if (!edge_set.insert(e).second) ++ds.duplicate_edges_removed;
  }
  ds.edges.assign(edge_set.begin(), edge_set.end());
  return ds;
}

void l1_normalize_features(NodeClassificationDataset& dataset) {
  for (int r = 0; r < dataset.features.rows(); ++r) {
    double norm = dataset.features.row(r).cwiseAbs().sum();
    if (norm > 0.0) dataset.features.row(r) /= norm;
  }
}

TransductiveSplit sample_split(int n_nodes, int train_size, std::uint64_t seed) {
  if (train_size < 1 || train_size >= n_nodes)
    throw std::invalid_argument("train size must be in [1, n_nodes)");
  std::vector<int> perm(n_nodes);
  for (int i = 0; i < n_nodes; ++i) perm[i] = i;
  std::mt19937_64 gen(mix_seed(seed, 0x517ULL));
  for (int i = 0; i < train_size; ++i) {
    int j = i + static_cast<int>(uniform01(gen) * (n_nodes - i));
    if (j >= n_nodes) j = n_nodes - 1;
    std::swap(perm[i], perm[j]);
  }
  TransductiveSplit split;
  split.seed = seed;
  split.train.assign(perm.begin(), perm.begin() + train_size);
  split.test.assign(perm.begin() + train_size, perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

InducedSubgraph induced_subgraph(const NodeClassificationDataset& dataset,
                                 const std::vector<int>& indices, bool normalized_laplacian) {
  if (indices.empty()) throw std::invalid_argument("empty node selection");
  const int m = static_cast<int>(indices.size());
  std::vector<int> renumber(dataset.n(), -1);
  for (int i = 0; i < m; ++i) {
    int v = indices[i];
    if (v < 0 || v >= dataset.n()) throw std::invalid_argument("node index out of range");
    if (renumber[v] != -1) throw std::invalid_argument("duplicate node index");
    renumber[v] = i;
  }

  InducedSubgraph sub;
  sub.features.resize(m, dataset.feature_dim());
  sub.labels.resize(m);
  for (int i = 0; i < m; ++i) {
    sub.features.row(i) = dataset.features.row(indices[i]);
    sub.labels[i] = dataset.labels[indices[i]];
  }

  std::vector<Eigen::Triplet<double>> adj;
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(m);
  for (const auto& [a, b] : dataset.edges) {
    int i = renumber[a], j = renumber[b];
    if (i < 0 || j < 0) continue;
    adj.emplace_back(i, j, 1.0);
    adj.emplace_back(j, i, 1.0);
    degree[i] += 1.0;
    degree[j] += 1.0;
    ++sub.edge_count;
  }
  std::vector<Eigen::Triplet<double>> lap;
  lap.reserve(adj.size() + m);
  if (normalized_laplacian) {
    for (const auto& t : adj)
      lap.emplace_back(t.row(), t.col(),
                       -1.0 / std::sqrt(degree[t.row()] * degree[t.col()]));
    for (int i = 0; i < m; ++i)
      if (degree[i] > 0.0) lap.emplace_back(i, i, 1.0);
  } else {
    for (const auto& t : adj) lap.emplace_back(t.row(), t.col(), -1.0);
    for (int i = 0; i < m; ++i)
      if (degree[i] > 0.0) lap.emplace_back(i, i, degree[i]);
  }
  sub.laplacian.resize(m, m);
  sub.laplacian.setFromTriplets(lap.begin(), lap.end());
  return sub;
}

double accuracy(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  if (logits.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("logits/labels length mismatch");
  if (labels.empty()) throw std::invalid_argument("empty label set");
  int correct = 0;
  for (int r = 0; r < logits.rows(); ++r) {
    Eigen::Index argmax = 0;
    logits.row(r).maxCoeff(&argmax);
    if (static_cast<int>(argmax) == labels[r]) ++correct;
  }
  return 100.0 * correct / static_cast<double>(labels.size());
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<int>(labels.size()), classes);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    if (labels[r] < 0 || labels[r] >= classes) throw std::invalid_argument("label out of range");
    out(static_cast<int>(r), labels[r]) = 1.0;
  }
  return out;
}

GapReport run_gap_sweep_dataset(const NodeClassificationDataset& dataset,
                                const DatasetSweepConfig& config) {
  if (config.n_list.size() < 2) throw std::invalid_argument("n_list needs at least 2 entries");
  for (std::size_t i = 1; i < config.n_list.size(); ++i)
    if (config.n_list[i] <= config.n_list[i - 1])
      throw std::invalid_argument("n_list must be strictly increasing");
  if (config.n_list.back() >= dataset.n())
    throw std::invalid_argument("largest N must leave held-out nodes");
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");

  const int classes = dataset.class_count();
  const std::vector<int> dims{dataset.feature_dim(), config.hidden, classes};

  // Full-graph mode shares one shift operator across all cells.
  InducedSubgraph full;
  std::unique_ptr<FilterOperator> full_op;
  Eigen::MatrixXd full_targets;
  if (config.full_graph_propagation) {
    std::vector<int> all(dataset.n());
    for (int i = 0; i < dataset.n(); ++i) all[i] = i;
    full = induced_subgraph(dataset, all, config.normalized_laplacian);
    full_op = std::make_unique<FilterOperator>(
        FilterOperator::matrix(full.laplacian, FilterBasis::Polynomial));
    full_targets = one_hot(full.labels, classes);
  }

  const int cell_count = static_cast<int>(config.n_list.size()) * config.trials;
  std::vector<std::vector<CellRecord>> cells(cell_count);
  parallel_cells(cell_count, config.jobs, [&](int idx) {
    const int n = config.n_list[idx / config.trials];
    const int trial = idx % config.trials;
    const std::uint64_t seed =
        mix_seed(mix_seed(config.master_seed, static_cast<std::uint64_t>(n)),
                 static_cast<std::uint64_t>(trial));
    TransductiveSplit split = sample_split(dataset.n(), n, seed);
    GnnModel init = GnnModel::random(dims, config.taps, FilterBasis::Polynomial,
                                     config.activation, seed, config.init_scale);
    TrainConfig tc;
    tc.lr = config.lr;
    tc.epochs = config.epochs;
    tc.seed = seed;
    tc.loss = LossKind::CrossEntropy;
    tc.linear_output = true;

    double train_loss, test_loss, train_acc, test_acc;
    if (config.full_graph_propagation) {
      tc.loss_rows = split.train;
      TrainResult res = train(init, *full_op, full.features, full_targets, tc);
      Eigen::MatrixXd logits =
          gnn_forward(res.model, *full_op, full.features, nullptr, nullptr, true);
      train_loss = res.loss_trace.back();
      test_loss = loss_value(LossKind::CrossEntropy, logits, full_targets, &split.test);
      std::vector<int> train_labels, test_labels;
      Eigen::MatrixXd train_logits(n, classes), test_logits(dataset.n() - n, classes);
      for (std::size_t i = 0; i < split.train.size(); ++i) {
        train_logits.row(static_cast<int>(i)) = logits.row(split.train[i]);
        train_labels.push_back(full.labels[split.train[i]]);
      }
      for (std::size_t i = 0; i < split.test.size(); ++i) {
        test_logits.row(static_cast<int>(i)) = logits.row(split.test[i]);
        test_labels.push_back(full.labels[split.test[i]]);
      }
      train_acc = accuracy(train_logits, train_labels);
      test_acc = accuracy(test_logits, test_labels);
    } else {
      InducedSubgraph train_sub =
          induced_subgraph(dataset, split.train, config.normalized_laplacian);
      FilterOperator train_opr =
          FilterOperator::matrix(train_sub.laplacian, FilterBasis::Polynomial);
      TrainResult res =
          train(init, train_opr, train_sub.features, one_hot(train_sub.labels, classes), tc);
      Eigen::MatrixXd train_logits =
          gnn_forward(res.model, train_opr, train_sub.features, nullptr, nullptr, true);
      train_loss = res.loss_trace.back();
      train_acc = accuracy(train_logits, train_sub.labels);

      InducedSubgraph test_sub =
          induced_subgraph(dataset, split.test, config.normalized_laplacian);
      FilterOperator test_opr =
          FilterOperator::matrix(test_sub.laplacian, FilterBasis::Polynomial);
      Eigen::MatrixXd test_logits =
          gnn_forward(res.model, test_opr, test_sub.features, nullptr, nullptr, true);
      test_loss =
          loss_value(LossKind::CrossEntropy, test_logits, one_hot(test_sub.labels, classes));
      test_acc = accuracy(test_logits, test_sub.labels);
    }

    double loss_gap = test_loss - train_loss;
    double acc_gap = train_acc - test_acc;
    auto& recs = cells[idx];
    recs.push_back({n, trial, "train_loss", train_loss});
    recs.push_back({n, trial, "test_loss", test_loss});
    recs.push_back({n, trial, "loss_gap", loss_gap});
    recs.push_back({n, trial, "loss_gap_abs", std::abs(loss_gap)});
    recs.push_back({n, trial, "train_acc", train_acc});
    recs.push_back({n, trial, "test_acc", test_acc});
    recs.push_back({n, trial, "acc_gap", acc_gap});
    recs.push_back({n, trial, "acc_gap_abs", std::abs(acc_gap)});
  });

  GapReport report;
  for (auto& cell : cells)
    for (auto& rec : cell) report.records.push_back(std::move(rec));
  report.summarize({"acc_gap_abs", "loss_gap_abs"});
  return report;
}

}  // namespace mgnn
