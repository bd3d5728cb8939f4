#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "mgnn/datasets.hpp"

using namespace mgnn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mgnn_ds_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& body) {
    fs::path p = path / name;
    std::ofstream out(p);
    out << body;
    return p.string();
  }
};

// Small synthetic citation-style dataset: ids n0..n{count-1}, 3 features,
// labels alternating a/b, ring edges.
NodeClassificationDataset ring_dataset(int count) {
  NodeClassificationDataset ds;
  ds.features.resize(count, 3);
  ds.class_names = {"a", "b"};
  for (int i = 0; i < count; ++i) {
    ds.node_ids.push_back("n" + std::to_string(i));
    ds.labels.push_back(i % 2);
    ds.features.row(i) << 1.0 * (i % 2), 1.0 - i % 2, 0.5;
  }
  for (int i = 0; i < count; ++i)
    ds.edges.emplace_back(std::min(i, (i + 1) % count), std::max(i, (i + 1) % count));
  std::sort(ds.edges.begin(), ds.edges.end());
  return ds;
}

}  // namespace

TEST_CASE("toy cora files parse to exact structures") {
  TempDir tmp;
  std::string content = tmp.file("cora.content",
                                 "paper1\t1\t0\t1\tgenetic_algorithms\n"
                                 "paper2\t0\t1\t0\tneural_networks\n");
  std::string cites = tmp.file("cora.cites",
                               "paper1\tpaper2\n"
                               "paper2\tpaper1\n"   // duplicate after symmetrization
                               "paper1\tpaper1\n"   // self edge
                               "paper1\tghost\n");  // unknown endpoint

  NodeClassificationDataset ds = load_cora(content, cites);
  CHECK(ds.n() == 2);
  CHECK(ds.feature_dim() == 3);
  CHECK(ds.class_count() == 2);
  // sorted class order: genetic_algorithms < neural_networks
  CHECK(ds.labels[0] == 0);
  CHECK(ds.labels[1] == 1);
  CHECK(ds.features(0, 0) == 1.0);
  CHECK(ds.features(1, 1) == 1.0);
  REQUIRE(ds.edges.size() == 1);
  CHECK(ds.edges[0] == std::pair<int, int>{0, 1});
  CHECK(ds.duplicate_edges_removed == 1);
  CHECK(ds.self_edges_removed == 1);
  CHECK(ds.unknown_endpoints_skipped == 1);

  SUBCASE("loading twice is identical") {
    NodeClassificationDataset again = load_cora(content, cites);
    CHECK(again.node_ids == ds.node_ids);
    CHECK(again.labels == ds.labels);
    CHECK(again.edges == ds.edges);
  }
}

TEST_CASE("malformed rows report line numbers") {
  TempDir tmp;
  std::string good = tmp.file("good.content", "p1\t1\t0\tx\np2\t0\t1\ty\n");
  std::string bad_row = tmp.file("bad.content", "p1\t1\t0\tx\np2\t0\ty\n");
  std::string bad_value = tmp.file("badval.content", "p1\t1\t0\tx\np2\t0\tnope\ty\n");
  std::string cites = tmp.file("empty.cites", "");
  std::string bad_cites = tmp.file("bad.cites", "p1\tp2\np1\n");

  CHECK_THROWS_WITH_AS(load_cora(bad_row, cites), doctest::Contains(":2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_cora(bad_value, cites), doctest::Contains(":2"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_cora(good, bad_cites), doctest::Contains(":2"), std::runtime_error);
  CHECK_THROWS_AS(load_cora("/nonexistent/file", cites), std::runtime_error);
}

TEST_CASE("feature normalization") {
  NodeClassificationDataset ds = ring_dataset(6);
  l1_normalize_features(ds);
  for (int r = 0; r < ds.n(); ++r)
    CHECK(ds.features.row(r).cwiseAbs().sum() == doctest::Approx(1.0));
}

TEST_CASE("transductive splits") {
  TransductiveSplit s = sample_split(100, 30, 7);
  CHECK(s.train.size() == 30);
  CHECK(s.test.size() == 70);
  std::set<int> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);  // disjoint and covering

  TransductiveSplit again = sample_split(100, 30, 7);
  CHECK(again.train == s.train);
  TransductiveSplit other = sample_split(100, 30, 8);
  CHECK(other.train != s.train);
  CHECK_THROWS_AS(sample_split(100, 100, 7), std::invalid_argument);
}

TEST_CASE("induced subgraphs") {
  NodeClassificationDataset ds = ring_dataset(10);

  SUBCASE("all nodes keeps every edge") {
    std::vector<int> all;
    for (int i = 0; i < 10; ++i) all.push_back(i);
    InducedSubgraph sub = induced_subgraph(ds, all);
    CHECK(sub.edge_count == static_cast<int>(ds.edges.size()));
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(10);
    CHECK((sub.laplacian * ones).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("two non-adjacent nodes give an empty edge set") {
    InducedSubgraph sub = induced_subgraph(ds, {0, 5});
    CHECK(sub.edge_count == 0);
    CHECK(sub.laplacian.nonZeros() == 0);
  }
  SUBCASE("random selection matches a brute-force edge filter") {
    std::vector<int> pick{1, 3, 4, 7, 8, 9};
    InducedSubgraph sub = induced_subgraph(ds, pick);
    int expected = 0;
    for (const auto& [a, b] : ds.edges) {
      bool has_a = std::count(pick.begin(), pick.end(), a) > 0;
      bool has_b = std::count(pick.begin(), pick.end(), b) > 0;
      if (has_a && has_b) ++expected;
    }
    CHECK(sub.edge_count == expected);
    CHECK(sub.labels.size() == pick.size());
    for (std::size_t i = 0; i < pick.size(); ++i) CHECK(sub.labels[i] == ds.labels[pick[i]]);
  }
  SUBCASE("normalized laplacian has unit diagonal on connected nodes") {
    std::vector<int> all;
    for (int i = 0; i < 10; ++i) all.push_back(i);
    InducedSubgraph sub = induced_subgraph(ds, all, true);
    for (int i = 0; i < 10; ++i) CHECK(sub.laplacian.coeff(i, i) == doctest::Approx(1.0));
  }
  SUBCASE("bad selections rejected") {
    CHECK_THROWS_AS(induced_subgraph(ds, {}), std::invalid_argument);
    CHECK_THROWS_AS(induced_subgraph(ds, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(induced_subgraph(ds, {99}), std::invalid_argument);
  }
}

TEST_CASE("accuracy and one-hot helpers") {
  Eigen::MatrixXd logits(3, 2);
  logits << 2.0, 1.0, 0.0, 3.0, 1.0, 1.5;
  CHECK(accuracy(logits, {0, 1, 1}) == doctest::Approx(100.0));
  CHECK(accuracy(logits, {1, 1, 0}) == doctest::Approx(100.0 / 3.0));

  Eigen::MatrixXd oh = one_hot({2, 0}, 3);
  CHECK(oh(0, 2) == 1.0);
  CHECK(oh(1, 0) == 1.0);
  CHECK(oh.sum() == 2.0);
  CHECK_THROWS_AS(one_hot({3}, 3), std::invalid_argument);
}

TEST_CASE("dataset gap sweep on a synthetic graph") {
  NodeClassificationDataset ds = ring_dataset(60);
  DatasetSweepConfig cfg;
  cfg.n_list = {10, 20};
  cfg.trials = 2;
  cfg.hidden = 4;
  cfg.epochs = 30;
  cfg.lr = 0.05;

  GapReport rep = run_gap_sweep_dataset(ds, cfg);
  std::set<std::string> metrics;
  for (const auto& r : rep.records) metrics.insert(r.metric);
  for (const char* m : {"train_loss", "test_loss", "loss_gap", "loss_gap_abs", "train_acc",
                        "test_acc", "acc_gap", "acc_gap_abs"})
    CHECK(metrics.count(m) == 1);

  SUBCASE("gap recomputes from the train/test metrics") {
    std::map<std::pair<int, int>, std::map<std::string, double>> cells;
    for (const auto& r : rep.records) cells[{r.n, r.seed}][r.metric] = r.value;
    for (auto& [key, vals] : cells) {
      CHECK(vals.at("loss_gap") ==
            doctest::Approx(vals.at("test_loss") - vals.at("train_loss")).epsilon(1e-12));
      CHECK(vals.at("acc_gap") ==
            doctest::Approx(vals.at("train_acc") - vals.at("test_acc")).epsilon(1e-12));
      CHECK(vals.at("train_acc") >= 0.0);
      CHECK(vals.at("train_acc") <= 100.0);
    }
  }
  SUBCASE("deterministic rerun") {
    GapReport again = run_gap_sweep_dataset(ds, cfg);
    REQUIRE(again.records.size() == rep.records.size());
    for (std::size_t i = 0; i < rep.records.size(); ++i)
      CHECK(again.records[i].value == rep.records[i].value);
  }
  SUBCASE("full-graph propagation mode runs and differs") {
    DatasetSweepConfig alt = cfg;
    alt.full_graph_propagation = true;
    GapReport full = run_gap_sweep_dataset(ds, alt);
    CHECK(full.records.size() == rep.records.size());
  }
  SUBCASE("largest N must leave held-out nodes") {
    DatasetSweepConfig bad = cfg;
    bad.n_list = {10, 60};
    CHECK_THROWS_AS(run_gap_sweep_dataset(ds, bad), std::invalid_argument);
  }
}
