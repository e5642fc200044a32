#include "doctest.h"
#include "helpers.hpp"

#include <map>
#include <numeric>

#include "augcl/errors.hpp"
#include "augcl/evaluation.hpp"
#include "augcl/trainer.hpp"

using namespace augcl;
using namespace testutil;

namespace {

/// Two classes centred at +e1 and -e1 with small noise.
EmbeddingTable separable_table(int per_class, std::size_t dim, Rng& rng, double noise = 0.05) {
  EmbeddingTable t;
  t.dim = dim;
  for (int label = 0; label < 2; ++label)
    for (int i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        double centre = d == 0 ? (label == 0 ? 1.0 : -1.0) : 0.0;
        t.values.push_back(centre + rng.uniform(-noise, noise));
      }
      t.labels.push_back(label);
    }
  return t;
}

double sample_std(const std::vector<double>& xs) {
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(), ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (xs.size() - 1));
}

LogisticOptions fast_options() {
  LogisticOptions o;
  o.iterations = 150;
  o.lambda_grid = {1e-2, 1.0};
  return o;
}

}  // namespace

TEST_CASE("graph probe separates +e1 / -e1 clusters perfectly") {
  Rng rng(1);
  EmbeddingTable t = separable_table(30, 4, rng);
  ProbeReport r = linear_probe_graph(t, 10, 1, 0, fast_options());
  CHECK(r.protocol == "graph");
  REQUIRE(r.accuracies.size() == 10);
  CHECK(r.lambdas.size() == 10);
  for (double a : r.accuracies) CHECK(a == 1.0);
  CHECK(r.mean == 1.0);
  CHECK(r.majority_baseline == 0.5);
}

TEST_CASE("graph probe on shuffled labels is near chance") {
  Rng rng(2);
  EmbeddingTable t = separable_table(100, 3, rng, 1.0);
  for (auto& x : t.values) x = rng.uniform(-1, 1);
  ProbeReport r = linear_probe_graph(t, 10, 1, 3, fast_options());
  CHECK(std::abs(r.mean - 0.5) <= 0.1);
}

TEST_CASE("constant embeddings score the majority fraction") {
  EmbeddingTable t;
  t.dim = 2;
  for (int i = 0; i < 40; ++i) {
    t.values.push_back(0.5);
    t.values.push_back(-0.5);
    t.labels.push_back(i < 30 ? 1 : 0);
  }
  ProbeReport r = linear_probe_graph(t, 10, 1, 0, fast_options());
  CHECK(r.majority_baseline == 0.75);
  CHECK(r.mean == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("repeated graph protocol reports folds x runs accuracies and the sample std") {
  Rng rng(3);
  EmbeddingTable t = separable_table(20, 3, rng, 1.5);
  ProbeReport r = linear_probe_graph(t, 5, 3, 7, fast_options());
  REQUIRE(r.accuracies.size() == 15);
  CHECK(r.folds == 5);
  CHECK(r.runs == 3);
  CHECK(r.std == doctest::Approx(sample_std(r.accuracies)).epsilon(1e-12));
  for (double a : r.accuracies) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("node probe: run count, determinism and separable accuracy") {
  Rng rng(4);
  EmbeddingTable t = separable_table(25, 3, rng);
  ProbeReport a = linear_probe_node(t, 20, 0.9, 11, fast_options());
  ProbeReport b = linear_probe_node(t, 20, 0.9, 11, fast_options());
  CHECK(a.protocol == "node");
  REQUIRE(a.accuracies.size() == 20);
  CHECK(a.accuracies == b.accuracies);
  CHECK(a.lambdas == b.lambdas);
  CHECK(a.mean == 1.0);
  CHECK(a.std == 0.0);
}

TEST_CASE("stratified folds keep class proportions") {
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i % 3 == 0 ? 1 : 0);
  auto folds = stratified_folds(labels, 5, 9);
  REQUIRE(folds.size() == labels.size());
  std::map<int, std::map<int, int>> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) counts[folds[i]][labels[i]]++;
  CHECK(counts.size() == 5);
  for (auto& [fold, c] : counts) {
    CHECK(c[1] == 4);
    CHECK(c[0] == 8);
  }
  CHECK(stratified_folds(labels, 5, 9) == folds);
}

TEST_CASE("probe rejects a class with a single item and non-finite embeddings") {
  Rng rng(5);
  EmbeddingTable t = separable_table(10, 2, rng);
  t.values.insert(t.values.end(), {0.0, 0.0});
  t.labels.push_back(2);
  CHECK_THROWS_AS(linear_probe_graph(t, 5, 1, 0, fast_options()), ContractViolation);
  EmbeddingTable u = separable_table(10, 2, rng);
  u.values[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(linear_probe_node(u, 3, 0.8, 0, fast_options()), ContractViolation);
}

TEST_CASE("logistic regression fits a three-class problem") {
  Rng rng(6);
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 90; ++i) {
    int c = i % 3;
    x.push_back((c == 0 ? 2.0 : 0.0) + rng.uniform(-0.2, 0.2));
    x.push_back((c == 1 ? 2.0 : 0.0) + rng.uniform(-0.2, 0.2));
    y.push_back(c);
  }
  LogisticRegression lr;
  lr.fit(x, 2, y, 3, 1e-3, 300);
  CHECK(lr.predict(x) == y);
}

TEST_CASE("embedding MUTAG gives one row per graph and is repeatable") {
  Dataset ds = parse_tudataset(mutag_dir());
  TrainConfig c;
  c.hidden_dim = 16;
  Model m(c, ds.feature_dim);
  EmbeddingTable a = embed_dataset(ds, m.base_encoder, TaskKind::Graph);
  EmbeddingTable b = embed_dataset(ds, m.base_encoder, TaskKind::Graph, 2, 7);
  CHECK(a.rows() == 188);
  CHECK(a.dim == 16);
  CHECK(a.values.size() == 188 * 16);
  CHECK(a.values == b.values);
  CHECK(a.labels == b.labels);
  for (int l : a.labels) CHECK((l == 0 || l == 1));
  for (double v : a.values) CHECK(std::isfinite(v));

  std::string csv = embedding_table_csv(a);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 189);
}

TEST_CASE("zero features and zero biases give zero graph embeddings") {
  Dataset ds = synthetic_graph_dataset(6, 3, 6, 1);
  for (auto& g : ds.graphs)
    for (auto& x : g.features) x = 0.0;
  TrainConfig c;
  c.hidden_dim = 8;
  Model m(c, ds.feature_dim);
  for (auto& [name, t] : m.group(kGroupBaseEncoder))
    if (name.size() >= 5 && name.compare(name.size() - 5, 5, ".bias") == 0)
      for (auto& x : t.mutable_data()) x = 0.0;
  EmbeddingTable t = embed_dataset(ds, m.base_encoder, TaskKind::Graph);
  for (double v : t.values) CHECK(v == 0.0);
}

TEST_CASE("node-task embeddings are one row per node") {
  Rng rng(3);
  Dataset ds;
  ds.name = "planted";
  ds.graphs.push_back(planted_partition_graph(10, 2, 0.4, 0.02, 0.2, rng));
  ds.num_classes = 2;
  ds.feature_dim = ds.graphs[0].feature_dim;
  TrainConfig c;
  c.task = TaskKind::Node;
  c.hidden_dim = 8;
  Model m(c, ds.feature_dim);
  EmbeddingTable t = embed_dataset(ds, m.base_encoder, TaskKind::Node, 2, 5);
  CHECK(t.rows() == 20);
  CHECK(t.dim == 8);
  EmbeddingTable u = embed_dataset(ds, m.base_encoder, TaskKind::Node, 2, 64);
  CHECK(t.values == u.values);
  ProbeReport r = linear_probe_node(t, 20, 0.8, 0, fast_options());
  CHECK(r.accuracies.size() == 20);
}

TEST_CASE("probe reports serialize every accuracy") {
  Rng rng(7);
  EmbeddingTable t = separable_table(15, 2, rng);
  ProbeReport r = linear_probe_graph(t, 3, 2, 0, fast_options());
  std::string json = probe_report_json(r);
  CHECK(json.find("\"protocol\": \"graph\"") != std::string::npos);
  CHECK(json.find("\"mean_accuracy\"") != std::string::npos);
  std::string csv = probe_report_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
