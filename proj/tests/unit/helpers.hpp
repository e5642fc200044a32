#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "augcl/graph.hpp"
#include "augcl/rng.hpp"
#include "augcl/tensor.hpp"

namespace testutil {

using namespace augcl;

inline Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0,
                            bool requires_grad = false) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::matrix(rows, cols, std::move(v), requires_grad);
}

/// Norm-wise relative error between two gradient vectors.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double scale = std::max({std::sqrt(na), std::sqrt(nb), 1e-6});
  return std::sqrt(diff) / scale;
}

/// Relative agreement, or absolute agreement for gradients that are zero.
inline bool gradients_match(const std::vector<double>& a, const std::vector<double>& b, double rel_tol,
                            double abs_tol = 1e-8) {
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst <= abs_tol || relative_error(a, b) <= rel_tol;
}

/// Central differences of `loss` with respect to `x`, perturbing x in place so
/// tensors captured by modules see the change.
inline std::vector<double> numeric_gradient(const std::function<double()>& loss, Tensor& x, double eps = 1e-5) {
  std::vector<double> out(x.numel());
  auto d = x.mutable_data();
  for (std::size_t k = 0; k < d.size(); ++k) {
    double orig = d[k];
    d[k] = orig + eps;
    double up = loss();
    d[k] = orig - eps;
    double down = loss();
    d[k] = orig;
    out[k] = (up - down) / (2 * eps);
  }
  return out;
}

/// Analytic gradient of `build()` with respect to `x`.
inline std::vector<double> analytic_gradient(const std::function<Tensor()>& build, Tensor& x) {
  x.zero_grad();
  Tensor loss = build();
  loss.backward();
  std::vector<double> g = x.grad();
  x.zero_grad();
  return g;
}

inline double gradient_error(const std::function<Tensor()>& build, Tensor& x, double eps = 1e-5) {
  auto analytic = analytic_gradient(build, x);
  auto numeric = numeric_gradient([&] { return build().item(); }, x, eps);
  return relative_error(analytic, numeric);
}

inline Graph make_graph(int n, const std::vector<std::pair<int, int>>& undirected_edges, std::size_t feature_dim = 1) {
  Graph g;
  g.num_nodes = n;
  for (auto [u, v] : undirected_edges) {
    g.edges.push_back({u, v});
    g.edges.push_back({v, u});
  }
  g.edge_weights.assign(g.edges.size(), 1.0);
  g.feature_dim = feature_dim;
  g.features.assign(static_cast<std::size_t>(n) * feature_dim, 1.0);
  return g;
}

inline Graph path_graph(int n, std::size_t feature_dim = 1) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return make_graph(n, e, feature_dim);
}

inline Graph star_graph(int leaves, std::size_t feature_dim = 1) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.push_back({0, i});
  return make_graph(leaves + 1, e, feature_dim);
}

inline Graph complete_graph(int n, std::size_t feature_dim = 1) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.push_back({i, j});
  return make_graph(n, e, feature_dim);
}

inline void randomize_features(Graph& g, Rng& rng) {
  for (auto& x : g.features) x = rng.uniform(-1, 1);
}

/// Connected components by plain BFS over the undirected edge relation.
inline bool is_connected(const Graph& g) {
  if (g.num_nodes <= 1) return true;
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (auto& e : g.edges) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::vector<bool> seen(g.num_nodes, false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  int count = 1;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = true;
        ++count;
        q.push(v);
      }
  }
  return count == g.num_nodes;
}

/// Unweighted hop distances from `source`; -1 for unreachable nodes.
inline std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (auto& e : g.edges) adj[e.src].push_back(e.dst);
  std::vector<int> dist(g.num_nodes, -1);
  std::queue<int> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  return dist;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("augcl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::filesystem::path mutag_dir() { return std::filesystem::path(AUGCL_DATA_DIR) / "MUTAG"; }

}  // namespace testutil
