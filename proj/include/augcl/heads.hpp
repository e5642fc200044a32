#pragma once

#include <string>
#include <vector>

#include "augcl/graph.hpp"
#include "augcl/nn.hpp"
#include "augcl/policy.hpp"
#include "augcl/sampling.hpp"

namespace augcl {

/// An augmented view. `graph` carries the forward values (features and edge
/// weights as plain numbers); `features` and `edge_weights` are the same
/// values as tape tensors, so the base encoder's gradient reaches the head.
struct HeadOutput {
  Graph graph;
  Tensor features;      // |V'| x d_x
  Tensor edge_weights;  // |E'| x 1
  std::vector<Tensor> soft_params;
  std::vector<int> kept_nodes;  // original id of every output node
};

struct HeadSettings {
  double keep_ratio = 0.75;  // node dropping keeps ceil(ratio * |V|) nodes
  int hops = 2;              // sub-graph BFS radius
  double temperature = 1.0;
};

/// Number of nodes node dropping keeps: max(1, ceil(ratio * n)).
int keep_count(double keep_ratio, int num_nodes);

/// Learned augmentation heads. Each head is conditioned on one graph and its
/// augmentation-encoder outputs (node rows H_v and graph row h_G).
class AugmentationHeads {
 public:
  AugmentationHeads() = default;
  AugmentationHeads(ParameterSet& params, const std::string& prefix, std::size_t hidden_dim, std::size_t feature_dim,
                    bool with_subgraph, std::uint64_t seed);

  HeadOutput apply(AugmentationKind kind, const Graph& g, const Tensor& node_reps, const Tensor& graph_rep,
                   const HeadSettings& settings, Rng& rng) const;

  HeadOutput node_dropping(const Graph& g, const Tensor& node_reps, const Tensor& graph_rep, double keep_ratio,
                           Rng& rng) const;
  HeadOutput edge_perturbation(const Graph& g, const Tensor& node_reps, double temperature, Rng& rng) const;
  HeadOutput subgraph(const Graph& g, const Tensor& node_reps, const Tensor& graph_rep, int hops, double temperature,
                      Rng& rng) const;
  HeadOutput feature_masking(const Graph& g, const Tensor& node_reps, double temperature, Rng& rng) const;

  bool has_subgraph() const { return with_subgraph_; }

 private:
  Tensor node_probabilities(const MLP& mlp, const Tensor& node_reps, const Tensor& graph_rep) const;

  bool with_subgraph_ = true;
  MLP node_drop_mlp_;
  MLP edge_mlp_;
  MLP subgraph_mlp_;
  Linear feature_projection_;
  MLP feature_mask_mlp_;
};

HeadOutput identity_augmentation(const Graph& g);

/// Non-edges sampled uniformly for edge perturbation. Pairs are unordered
/// (u < v) when `undirected`, ordered otherwise; self-loops are never drawn.
std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count, bool undirected, Rng& rng);

/// Builds the encoder input for a list of views.
struct ViewBatch {
  GraphBatch structure;
  Tensor features;
  Tensor edge_weights;
};
ViewBatch batch_views(const std::vector<HeadOutput>& views);

}  // namespace augcl
