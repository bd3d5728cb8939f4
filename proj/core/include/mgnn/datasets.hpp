#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mgnn/experiments.hpp"
#include "mgnn/training.hpp"

namespace mgnn {

struct NodeClassificationDataset {
  std::vector<std::string> node_ids;
  Eigen::MatrixXd features;                // n_nodes x n_features
  std::vector<int> labels;                 // class indices
  std::vector<std::pair<int, int>> edges;  // undirected, i < j, deduplicated
  std::vector<std::string> class_names;    // sorted; index = label

  int duplicate_edges_removed = 0;
  int self_edges_removed = 0;
  int unknown_endpoints_skipped = 0;

  int n() const { return static_cast<int>(node_ids.size()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  int class_count() const { return static_cast<int>(class_names.size()); }
};

/// Standard Cora layout: `cora.content` rows `<id>\t<features...>\t<class>`,
/// `cora.cites` rows `<cited>\t<citing>`. Class names map to indices in
/// sorted order, so repeated loads agree.
NodeClassificationDataset load_cora(const std::string& content_path,
                                    const std::string& cites_path);

/// Rows scaled to unit l1 norm (zero rows left alone).
void l1_normalize_features(NodeClassificationDataset& dataset);

struct TransductiveSplit {
  std::vector<int> train;  // size N, sampled without replacement
  std::vector<int> test;   // the remaining nodes
  std::uint64_t seed = 0;
};
TransductiveSplit sample_split(int n_nodes, int train_size, std::uint64_t seed);

struct InducedSubgraph {
  Eigen::SparseMatrix<double> laplacian;  // unit edge weights
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int edge_count = 0;
};

/// Keeps edges with both endpoints selected; nodes renumbered in the order
/// given by `indices`.
InducedSubgraph induced_subgraph(const NodeClassificationDataset& dataset,
                                 const std::vector<int>& indices,
                                 bool normalized_laplacian = false);

/// Percentage of rows whose argmax matches the label.
double accuracy(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

Eigen::MatrixXd one_hot(const std::vector<int>& labels, int classes);

struct DatasetSweepConfig {
  std::vector<int> n_list;  // train-set sizes, strictly increasing
  int trials = 10;
  std::uint64_t master_seed = 0;
  int jobs = 1;

  int hidden = 16;
  int taps = 2;
  Activation activation = Activation::Relu;
  double lr = 0.005;
  int epochs = 1000;
  double init_scale = 1.0;

  bool full_graph_propagation = false;  // propagate on the whole graph, mask the loss
  bool normalized_laplacian = false;    // I - D^{-1/2} A D^{-1/2} instead of D - A
};

/// Transductive sweep: per (N, trial) sample N train nodes, train a
/// 2-layer classifier with cross-entropy, evaluate on the held-out nodes.
/// Metrics: train_loss, test_loss, loss_gap (= test - train), loss_gap_abs,
/// train_acc, test_acc, acc_gap (= train - test), acc_gap_abs.
GapReport run_gap_sweep_dataset(const NodeClassificationDataset& dataset,
                                const DatasetSweepConfig& config);

}  // namespace mgnn
