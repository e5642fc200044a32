#include "augcl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "augcl/errors.hpp"
#include "json.hpp"

namespace augcl {

EmbeddingTable embed_dataset(const Dataset& dataset, const GraphEncoder& encoder, TaskKind task, int hops,
                             std::size_t chunk) {
  AUGCL_REQUIRE(chunk >= 1, "embed_dataset: chunk size must be positive");
  AUGCL_REQUIRE(hops >= 1, "embed_dataset: hops must be >= 1");
  EmbeddingTable table;
  table.dataset = dataset.name;
  table.dim = encoder.config().hidden_dim;

  auto append_rows = [&](const Tensor& m, const std::vector<int>& rows) {
    for (int r : rows)
      for (std::size_t c = 0; c < m.cols(); ++c) table.values.push_back(m.at(static_cast<std::size_t>(r), c));
  };

  if (task == TaskKind::Graph) {
    for (std::size_t start = 0; start < dataset.graphs.size(); start += chunk) {
      std::size_t end = std::min(dataset.graphs.size(), start + chunk);
      std::vector<Graph> graphs(dataset.graphs.begin() + static_cast<long>(start),
                                dataset.graphs.begin() + static_cast<long>(end));
      GraphBatch batch = batch_graphs(std::move(graphs));
      Encodings enc = encoder.encode(batch);
      std::vector<int> rows(end - start);
      std::iota(rows.begin(), rows.end(), 0);
      append_rows(enc.graph_embedding, rows);
      for (std::size_t k = start; k < end; ++k) table.labels.push_back(dataset.graphs[k].label.value_or(-1));
    }
    return table;
  }

  for (const Graph& g : dataset.graphs) {
    for (int start = 0; start < g.num_nodes; start += static_cast<int>(chunk)) {
      int end = std::min(g.num_nodes, start + static_cast<int>(chunk));
      std::vector<Graph> subs;
      std::vector<int> centers;
      for (int v = start; v < end; ++v) {
        Subgraph s = khop_bfs(g, v, hops);
        centers.push_back(s.center);
        subs.push_back(std::move(s.graph));
      }
      GraphBatch batch = batch_graphs(std::move(subs));
      Encodings enc = encoder.encode(batch);
      std::vector<int> rows;
      for (std::size_t k = 0; k < centers.size(); ++k) rows.push_back(batch.node_offsets[k] + centers[k]);
      append_rows(enc.node_embedding, rows);
      for (int v = start; v < end; ++v) table.labels.push_back(g.node_labels.empty() ? -1 : g.node_labels[v]);
    }
  }
  return table;
}

void LogisticRegression::fit(const std::vector<double>& x, std::size_t dim, const std::vector<int>& y,
                             int num_classes, double lambda, int iterations) {
  AUGCL_REQUIRE(dim >= 1 && num_classes >= 2, "logistic regression: needs features and two classes");
  AUGCL_REQUIRE(x.size() == y.size() * dim && !y.empty(), "logistic regression: shape mismatch");
  dim_ = dim;
  classes_ = num_classes;
  std::size_t n = y.size(), d1 = dim + 1, k = static_cast<std::size_t>(num_classes);

  mean_.assign(dim, 0.0);
  scale_.assign(dim, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) mean_[j] += x[i * dim + j];
  for (auto& m : mean_) m /= static_cast<double>(n);
  std::vector<double> var(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim; ++j) var[j] += std::pow(x[i * dim + j] - mean_[j], 2);
  for (std::size_t j = 0; j < dim; ++j) {
    double s = std::sqrt(var[j] / static_cast<double>(n));
    scale_[j] = s > 1e-12 ? s : 1.0;
  }
  std::vector<double> z(n * d1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) z[i * d1 + j] = (x[i * dim + j] - mean_[j]) / scale_[j];
    z[i * d1 + dim] = 1.0;
  }

  // Largest eigenvalue of Z^T Z / n by power iteration bounds the curvature.
  std::vector<double> u(d1, 1.0), zu(n), next(d1);
  double top = 1.0;
  for (int it = 0; it < 50; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < d1; ++j) s += z[i * d1 + j] * u[j];
      zu[i] = s;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d1; ++j) next[j] += z[i * d1 + j] * zu[i] / static_cast<double>(n);
    double norm = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
    if (norm <= 0) break;
    top = norm;
    for (std::size_t j = 0; j < d1; ++j) u[j] = next[j] / norm;
  }
  double step = 1.0 / (0.5 * top * 1.05 + lambda);

  std::vector<double> w(d1 * k, 0.0), w_prev = w, look = w, grad(d1 * k), probs(k);
  for (int it = 0; it < iterations; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -INFINITY;
      for (std::size_t c = 0; c < k; ++c) {
        double s = 0;
        for (std::size_t j = 0; j < d1; ++j) s += z[i * d1 + j] * look[j * k + c];
        probs[c] = s;
        mx = std::max(mx, s);
      }
      double total = 0;
      for (auto& p : probs) total += (p = std::exp(p - mx));
      for (std::size_t c = 0; c < k; ++c) {
        double r = probs[c] / total - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d1; ++j) grad[j * k + c] += z[i * d1 + j] * r / static_cast<double>(n);
      }
    }
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t c = 0; c < k; ++c) grad[j * k + c] += lambda * look[j * k + c];
    double momentum = static_cast<double>(it) / (it + 3.0);
    for (std::size_t q = 0; q < w.size(); ++q) {
      double updated = look[q] - step * grad[q];
      look[q] = updated + momentum * (updated - w_prev[q]);
      w_prev[q] = updated;
    }
    w = w_prev;
  }
  weight_ = std::move(w);
}

std::vector<int> LogisticRegression::predict(const std::vector<double>& x) const {
  AUGCL_REQUIRE(dim_ > 0 && x.size() % dim_ == 0, "logistic regression: predict before fit or shape mismatch");
  std::size_t n = x.size() / dim_, k = static_cast<std::size_t>(classes_);
  std::vector<int> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    double best_score = -INFINITY;
    for (std::size_t c = 0; c < k; ++c) {
      double s = weight_[dim_ * k + c];
      for (std::size_t j = 0; j < dim_; ++j) s += (x[i * dim_ + j] - mean_[j]) / scale_[j] * weight_[j * k + c];
      if (s > best_score) {
        best_score = s;
        best = static_cast<int>(c);
      }
    }
    out[i] = best;
  }
  return out;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  AUGCL_REQUIRE(folds >= 1, "stratified_folds: folds must be positive");
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(static_cast<int>(i));
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  std::size_t cursor = 0;
  for (auto& [label, members] : by_class) {
    Rng class_rng = rng.split(static_cast<std::uint64_t>(static_cast<std::int64_t>(label)));
    class_rng.shuffle(members);
    for (int m : members) fold[m] = static_cast<int>(cursor++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

namespace {

std::vector<double> gather(const EmbeddingTable& t, const std::vector<int>& idx) {
  std::vector<double> out;
  out.reserve(idx.size() * t.dim);
  for (int i : idx) out.insert(out.end(), t.row(i), t.row(i) + t.dim);
  return out;
}

std::vector<int> labels_of(const EmbeddingTable& t, const std::vector<int>& idx) {
  std::vector<int> out;
  for (int i : idx) out.push_back(t.labels[i]);
  return out;
}

double accuracy(const EmbeddingTable& t, const std::vector<int>& train, const std::vector<int>& test, int classes,
                double lambda, int iterations) {
  if (test.empty()) return 0.0;
  LogisticRegression model;
  model.fit(gather(t, train), t.dim, labels_of(t, train), classes, lambda, iterations);
  auto pred = model.predict(gather(t, test));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < test.size(); ++i) hit += pred[i] == t.labels[test[i]] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(test.size());
}

void finish(ProbeReport& r) {
  double n = static_cast<double>(r.accuracies.size());
  r.mean = std::accumulate(r.accuracies.begin(), r.accuracies.end(), 0.0) / n;
  double ss = 0;
  for (double a : r.accuracies) ss += (a - r.mean) * (a - r.mean);
  r.std = r.accuracies.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
}

struct Labeled {
  std::vector<int> items;
  int classes = 0;
  double majority = 0;
};

Labeled labeled_items(const EmbeddingTable& table, std::size_t minimum) {
  AUGCL_REQUIRE(table.dim >= 1, "probe: empty embedding dimension");
  AUGCL_REQUIRE(table.values.size() == table.rows() * table.dim, "probe: embedding table shape mismatch");
  for (double v : table.values) AUGCL_REQUIRE(std::isfinite(v), "probe: embeddings contain non-finite values");
  Labeled out;
  std::map<int, int> counts;
  for (std::size_t i = 0; i < table.rows(); ++i)
    if (table.labels[i] >= 0) {
      out.items.push_back(static_cast<int>(i));
      ++counts[table.labels[i]];
      out.classes = std::max(out.classes, table.labels[i] + 1);
    }
  AUGCL_REQUIRE(out.items.size() >= minimum, "probe: too few labeled items for the protocol");
  AUGCL_REQUIRE(counts.size() >= 2, "probe: needs at least two classes");
  int most = 0;
  for (auto& [label, c] : counts) {
    if (c < 2)
      throw ContractViolation("probe: class " + std::to_string(label) +
                              " has a single item and would be absent from a training split");
    most = std::max(most, c);
  }
  out.majority = static_cast<double>(most) / static_cast<double>(out.items.size());
  return out;
}

}  // namespace

double fit_and_score(const EmbeddingTable& table, const std::vector<int>& train, const std::vector<int>& test,
                     int num_classes, const LogisticOptions& options, std::uint64_t seed, double* chosen_lambda) {
  AUGCL_REQUIRE(!options.lambda_grid.empty(), "probe: empty penalty grid");
  double best_lambda = options.lambda_grid.front();
  int inner = std::min<int>(options.inner_folds, static_cast<int>(train.size()));
  if (options.lambda_grid.size() > 1 && inner >= 2) {
    auto fold = stratified_folds(labels_of(table, train), inner, seed);
    double best = -1;
    for (double lambda : options.lambda_grid) {
      double score = 0;
      for (int f = 0; f < inner; ++f) {
        std::vector<int> tr, va;
        for (std::size_t i = 0; i < train.size(); ++i) (fold[i] == f ? va : tr).push_back(train[i]);
        if (tr.empty() || va.empty()) continue;
        score += accuracy(table, tr, va, num_classes, lambda, options.iterations);
      }
      if (score > best) {
        best = score;
        best_lambda = lambda;
      }
    }
  }
  if (chosen_lambda) *chosen_lambda = best_lambda;
  return accuracy(table, train, test, num_classes, best_lambda, options.iterations);
}

ProbeReport linear_probe_graph(const EmbeddingTable& table, int folds, int runs, std::uint64_t seed,
                               const LogisticOptions& options) {
  AUGCL_REQUIRE(folds >= 2 && runs >= 1, "linear_probe_graph: needs >= 2 folds and >= 1 run");
  Labeled data = labeled_items(table, static_cast<std::size_t>(folds));
  ProbeReport report;
  report.protocol = "graph";
  report.seed = seed;
  report.folds = folds;
  report.runs = runs;
  report.majority_baseline = data.majority;
  Rng root(seed);
  for (int r = 0; r < runs; ++r) {
    Rng run_rng = root.split(static_cast<std::uint64_t>(r));
    auto fold = stratified_folds(labels_of(table, data.items), folds, run_rng.split("folds").next_u64());
    for (int f = 0; f < folds; ++f) {
      std::vector<int> train, test;
      for (std::size_t i = 0; i < data.items.size(); ++i) (fold[i] == f ? test : train).push_back(data.items[i]);
      double lambda = 0;
      report.accuracies.push_back(fit_and_score(table, train, test, data.classes, options,
                                                run_rng.split("inner").split(static_cast<std::uint64_t>(f)).next_u64(),
                                                &lambda));
      report.lambdas.push_back(lambda);
    }
  }
  finish(report);
  return report;
}

ProbeReport linear_probe_node(const EmbeddingTable& table, int runs, double train_frac, std::uint64_t seed,
                              const LogisticOptions& options) {
  AUGCL_REQUIRE(runs >= 1, "linear_probe_node: needs >= 1 run");
  AUGCL_REQUIRE(train_frac > 0 && train_frac < 1, "linear_probe_node: train_frac must be in (0, 1)");
  Labeled data = labeled_items(table, 4);
  ProbeReport report;
  report.protocol = "node";
  report.seed = seed;
  report.runs = runs;
  report.majority_baseline = data.majority;
  std::map<int, std::vector<int>> by_class;
  for (int i : data.items) by_class[table.labels[i]].push_back(i);
  Rng root(seed);
  for (int r = 0; r < runs; ++r) {
    Rng run_rng = root.split(static_cast<std::uint64_t>(r));
    std::vector<int> train, test;
    for (auto [label, members] : by_class) {
      Rng class_rng = run_rng.split(static_cast<std::uint64_t>(label));
      class_rng.shuffle(members);
      auto n = static_cast<int>(members.size());
      int take = std::clamp(static_cast<int>(std::lround(train_frac * n)), 1, n - 1);
      for (int m = 0; m < n; ++m) (m < take ? train : test).push_back(members[m]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    double lambda = 0;
    report.accuracies.push_back(
        fit_and_score(table, train, test, data.classes, options, run_rng.split("inner").next_u64(), &lambda));
    report.lambdas.push_back(lambda);
  }
  finish(report);
  return report;
}

std::string probe_report_json(const ProbeReport& report) {
  nlohmann::json j;
  j["protocol"] = report.protocol;
  j["mean_accuracy"] = report.mean;
  j["std_accuracy"] = report.std;
  j["accuracies"] = report.accuracies;
  j["lambdas"] = report.lambdas;
  j["seed"] = report.seed;
  j["folds"] = report.folds;
  j["runs"] = report.runs;
  j["majority_baseline"] = report.majority_baseline;
  return j.dump(2) + "\n";
}

std::string probe_report_csv(const ProbeReport& report) {
  std::ostringstream out;
  out << "index,accuracy,lambda\n";
  char buf[64];
  for (std::size_t i = 0; i < report.accuracies.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", report.accuracies[i]);
    out << i << ',' << buf << ',';
    std::snprintf(buf, sizeof buf, "%.17g", report.lambdas[i]);
    out << buf << '\n';
  }
  return out.str();
}

std::string embedding_table_csv(const EmbeddingTable& table) {
  std::ostringstream out;
  out << "index,label";
  for (std::size_t c = 0; c < table.dim; ++c) out << ",e" << c;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < table.rows(); ++i) {
    out << i << ',' << table.labels[i];
    for (std::size_t c = 0; c < table.dim; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", table.row(i)[c]);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace augcl
