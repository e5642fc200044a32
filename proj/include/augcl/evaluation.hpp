#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augcl/encoder.hpp"
#include "augcl/graph.hpp"

namespace augcl {

/// One embedding row per graph (graph task) or per node (node task).
struct EmbeddingTable {
  std::string dataset;
  std::string checkpoint_id;
  std::size_t dim = 0;
  std::vector<double> values;  // rows x dim, row-major
  std::vector<int> labels;     // -1 marks an unlabeled item

  std::size_t rows() const { return labels.size(); }
  const double* row(std::size_t i) const { return values.data() + i * dim; }
};

/// Frozen-encoder embeddings with dropout off. Graph task: pre-projection
/// read-out per graph. Node task: the centre row of each node's k-hop subgraph,
/// written back to the node's original id.
EmbeddingTable embed_dataset(const Dataset& dataset, const GraphEncoder& encoder, TaskKind task, int hops = 2,
                             std::size_t chunk = 64);

struct ProbeReport {
  std::string protocol;  // "graph" or "node"
  double mean = 0;
  double std = 0;  // sample standard deviation of `accuracies`
  std::vector<double> accuracies;
  std::vector<double> lambdas;  // penalty chosen for each fold or run
  std::uint64_t seed = 0;
  int folds = 0;
  int runs = 0;
  double majority_baseline = 0;
};

inline const std::vector<double> kProbeLambdaGrid = {1e-3, 1e-2, 1e-1, 1, 1e1, 1e2, 1e3};

struct LogisticOptions {
  int iterations = 300;
  std::vector<double> lambda_grid = kProbeLambdaGrid;
  int inner_folds = 3;
};

/// Multinomial logistic regression on standardized features, trained by
/// full-batch accelerated gradient descent with an L2 penalty on the weights.
class LogisticRegression {
 public:
  void fit(const std::vector<double>& x, std::size_t dim, const std::vector<int>& y, int num_classes, double lambda,
           int iterations);
  std::vector<int> predict(const std::vector<double>& x) const;

 private:
  std::size_t dim_ = 0;
  int classes_ = 0;
  std::vector<double> mean_, scale_;
  std::vector<double> weight_;  // (dim + 1) x classes, last row is the intercept
};

/// Accuracy of a classifier fit on `train` and scored on `test`, with the
/// penalty chosen by stratified inner cross-validation on `train`.
double fit_and_score(const EmbeddingTable& table, const std::vector<int>& train, const std::vector<int>& test,
                     int num_classes, const LogisticOptions& options, std::uint64_t seed, double* chosen_lambda);

/// Stratified fold id per listed item; fold assignment is seeded.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

/// Stratified k-fold cross-validation repeated `runs` times.
ProbeReport linear_probe_graph(const EmbeddingTable& table, int folds = 10, int runs = 1, std::uint64_t seed = 0,
                               const LogisticOptions& options = {});
/// `runs` random stratified train/test splits.
ProbeReport linear_probe_node(const EmbeddingTable& table, int runs = 20, double train_frac = 0.8,
                              std::uint64_t seed = 0, const LogisticOptions& options = {});

std::string probe_report_json(const ProbeReport& report);
std::string probe_report_csv(const ProbeReport& report);
std::string embedding_table_csv(const EmbeddingTable& table);

}  // namespace augcl
