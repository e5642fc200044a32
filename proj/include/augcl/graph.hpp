#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "augcl/rng.hpp"
#include "augcl/tensor.hpp"

namespace augcl {

struct Edge {
  int src = 0;
  int dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Attributed graph. Undirected data is stored with both orientations.
struct Graph {
  int num_nodes = 0;
  std::vector<Edge> edges;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // num_nodes x feature_dim, row-major
  std::vector<double> edge_weights;
  std::optional<int> label;
  std::vector<int> node_labels;  // per-node classes for node tasks; may be empty

  std::size_t num_edges() const { return edges.size(); }
  double feature(int node, std::size_t dim) const { return features[node * feature_dim + dim]; }
  Tensor feature_tensor() const;
  Tensor weight_tensor() const;
  /// True if every (u, v) has a matching (v, u).
  bool is_symmetric() const;
  bool has_edge(int src, int dst) const;
};

/// Throws ContractViolation describing the first broken invariant.
void validate(const Graph& g);

/// A graph cut out of a larger one, with the id maps back to its parent.
struct Subgraph {
  Graph graph;
  std::vector<int> new_to_old;
  std::vector<int> old_to_new;   // -1 for nodes not kept
  std::vector<int> edge_origin;  // index of each kept edge in the parent's edge list
  int center = -1;               // new id of the BFS center, if any
};

/// Subgraph induced on `keep` (any order; output ids follow ascending old id).
Subgraph induced_subgraph(const Graph& g, std::vector<int> keep);

/// Subgraph induced on every node within `hops` BFS steps of `center`.
Subgraph khop_bfs(const Graph& g, int center, int hops);

/// Disjoint union of graphs with global node and edge numbering.
struct GraphBatch {
  std::vector<Graph> graphs;
  std::vector<int> node_offsets;  // first global node id of each graph
  std::vector<int> edge_offsets;  // first global edge id of each graph
  std::vector<int> node_to_graph;
  std::vector<int> src;  // global edge endpoints
  std::vector<int> dst;
  int total_nodes = 0;
  int total_edges = 0;
  std::vector<int> centers;        // node-task batches: original id of each subgraph's center
  std::vector<int> center_locals;  // node-task batches: center's id within its subgraph

  std::size_t size() const { return graphs.size(); }
  int graph_nodes(std::size_t k) const { return graphs[k].num_nodes; }
  Tensor feature_tensor() const;
  Tensor weight_tensor() const;
};

GraphBatch batch_graphs(std::vector<Graph> graphs);
std::vector<Graph> unbatch(const GraphBatch& batch);

/// B k-hop subgraphs around uniformly drawn centers.
GraphBatch make_node_task_batch(const Graph& g, int batch_size, int hops, std::uint64_t seed);

struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  int num_classes = 0;
  std::size_t feature_dim = 0;
  std::size_t duplicate_edges_dropped = 0;
  bool synthesized_features = false;
};

enum class TaskKind { Graph, Node };

/// Reads the TUDataset text convention from `directory` (files DS_A.txt,
/// DS_graph_indicator.txt, DS_graph_labels.txt, optional DS_node_labels.txt and
/// DS_node_attributes.txt, where DS is the directory name).
/// For TaskKind::Node the node labels become per-node targets instead of features.
Dataset parse_tudataset(const std::filesystem::path& directory, TaskKind task = TaskKind::Graph);

/// Writes `ds` in the same text convention into `directory` (created if
/// needed; file prefix is the directory name). Features go to node_attributes,
/// per-node targets to node_labels.
void write_tudataset(const Dataset& ds, const std::filesystem::path& directory);

/// One-hot degree (capped at kMaxDegreeFeature) plus a constant channel.
inline constexpr int kMaxDegreeFeature = 64;
void synthesize_degree_features(Graph& g);

struct DatasetStats {
  std::size_t graphs = 0;
  double mean_nodes = 0;
  double mean_edges = 0;  // undirected: each symmetric pair counted once
  std::size_t feature_dim = 0;
  int num_classes = 0;
};
DatasetStats dataset_stats(const Dataset& ds);
std::size_t undirected_edge_count(const Graph& g);

void save_dataset_cache(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset_cache(const std::filesystem::path& path);

// ---- generators for tests and demos ----

/// Erdos-Renyi style undirected graph with uniform random features in [0, 1).
Graph random_graph(int num_nodes, double edge_prob, std::size_t feature_dim, Rng& rng);
/// Two-block-or-more planted partition graph; node_labels hold the blocks and
/// features are noisy one-hot block indicators.
Graph planted_partition_graph(int nodes_per_block, int blocks, double p_in, double p_out, double feature_noise,
                              Rng& rng);
/// Small labelled graph-classification dataset: class 0 graphs are cycles,
/// class 1 graphs are cycles with chords and a distinct feature pattern.
Dataset synthetic_graph_dataset(int num_graphs, int min_nodes, int max_nodes, std::uint64_t seed);

}  // namespace augcl
