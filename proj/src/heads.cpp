#include "augcl/heads.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "augcl/errors.hpp"

namespace augcl {

int keep_count(double keep_ratio, int num_nodes) {
  AUGCL_REQUIRE(keep_ratio > 0.0 && keep_ratio <= 1.0, "keep ratio must be in (0, 1]");
  // The small offset keeps products like 0.6 * 5 from rounding up past 3.
  int k = static_cast<int>(std::ceil(keep_ratio * num_nodes - 1e-9));
  return std::clamp(k, 1, std::max(num_nodes, 1));
}

AugmentationHeads::AugmentationHeads(ParameterSet& params, const std::string& prefix, std::size_t hidden_dim,
                                     std::size_t feature_dim, bool with_subgraph, std::uint64_t seed)
    : with_subgraph_(with_subgraph) {
  std::size_t d = hidden_dim;
  node_drop_mlp_ = MLP(params, prefix + ".node_drop", {2 * d, d, 1}, seed);
  edge_mlp_ = MLP(params, prefix + ".edge_perturb", {d + 1, d, 1}, seed);
  if (with_subgraph) subgraph_mlp_ = MLP(params, prefix + ".subgraph", {2 * d, d, 1}, seed);
  feature_projection_ = Linear(params, prefix + ".feature_mask.proj", feature_dim, feature_dim, seed);
  feature_mask_mlp_ = MLP(params, prefix + ".feature_mask.mlp", {d, d, feature_dim}, seed);
}

HeadOutput AugmentationHeads::apply(AugmentationKind kind, const Graph& g, const Tensor& node_reps,
                                    const Tensor& graph_rep, const HeadSettings& settings, Rng& rng) const {
  switch (kind) {
    case AugmentationKind::NodeDrop: return node_dropping(g, node_reps, graph_rep, settings.keep_ratio, rng);
    case AugmentationKind::EdgePerturb: return edge_perturbation(g, node_reps, settings.temperature, rng);
    case AugmentationKind::SubGraph: return subgraph(g, node_reps, graph_rep, settings.hops, settings.temperature, rng);
    case AugmentationKind::FeatureMask: return feature_masking(g, node_reps, settings.temperature, rng);
    case AugmentationKind::Identity: return identity_augmentation(g);
  }
  throw ContractViolation("unknown augmentation kind");
}

Tensor AugmentationHeads::node_probabilities(const MLP& mlp, const Tensor& node_reps, const Tensor& graph_rep) const {
  std::vector<int> broadcast(node_reps.rows(), 0);
  Tensor input = concat_cols({node_reps, gather_rows(graph_rep, broadcast)});
  return mlp(input);
}

namespace {

void require_head_inputs(const Graph& g, const Tensor& node_reps) {
  AUGCL_REQUIRE(g.num_nodes >= 1, "augmentation head: graph has no nodes");
  AUGCL_REQUIRE(node_reps.rows() == static_cast<std::size_t>(g.num_nodes),
                "augmentation head: node representation count differs from |V|");
}

// Edge weights p(v_i) + p(v_j) for the kept edges of an induced subgraph.
Tensor pair_weights(const Subgraph& sub, const Graph& parent, const Tensor& node_probs) {
  std::vector<int> src, dst;
  for (int e : sub.edge_origin) {
    src.push_back(parent.edges[e].src);
    dst.push_back(parent.edges[e].dst);
  }
  return add(gather_rows(node_probs, src), gather_rows(node_probs, dst));
}

HeadOutput from_subgraph(Subgraph sub, const Graph& parent, const Tensor& node_probs) {
  HeadOutput out;
  out.edge_weights = pair_weights(sub, parent, node_probs);
  out.graph = std::move(sub.graph);
  out.graph.edge_weights.assign(out.edge_weights.data().begin(), out.edge_weights.data().end());
  out.features = out.graph.feature_tensor();
  out.kept_nodes = std::move(sub.new_to_old);
  out.soft_params.push_back(node_probs);
  return out;
}

}  // namespace

HeadOutput AugmentationHeads::node_dropping(const Graph& g, const Tensor& node_reps, const Tensor& graph_rep,
                                            double keep_ratio, Rng& rng) const {
  require_head_inputs(g, node_reps);
  Tensor probs = softmax(node_probabilities(node_drop_mlp_, node_reps, graph_rep), 0);
  int k = keep_count(keep_ratio, g.num_nodes);
  SubsetSample pick = gumbel_top_k(probs.data(), k, rng);
  return from_subgraph(induced_subgraph(g, pick.indices), g, probs);
}

HeadOutput AugmentationHeads::subgraph(const Graph& g, const Tensor& node_reps, const Tensor& graph_rep, int hops,
                                       double temperature, Rng& rng) const {
  AUGCL_REQUIRE(with_subgraph_, "sub-graph head is disabled for this model");
  AUGCL_REQUIRE(hops >= 1, "sub-graph head needs at least one hop");
  require_head_inputs(g, node_reps);
  Tensor scores = node_probabilities(subgraph_mlp_, node_reps, graph_rep);
  Tensor probs = softmax(scores, 0);
  CategoricalSample center = gumbel_softmax(scores, temperature, rng);
  return from_subgraph(khop_bfs(g, center.index, hops), g, probs);
}

std::vector<Edge> sample_negative_edges(const Graph& g, std::size_t count, bool undirected, Rng& rng) {
  std::vector<Edge> out;
  if (count == 0 || g.num_nodes < 2) return out;
  std::set<Edge> existing;
  for (auto& e : g.edges) {
    if (e.src == e.dst) continue;
    existing.insert(undirected ? Edge{std::min(e.src, e.dst), std::max(e.src, e.dst)} : e);
  }
  auto n = static_cast<std::size_t>(g.num_nodes);
  std::size_t pairs = undirected ? n * (n - 1) / 2 : n * (n - 1);
  std::size_t available = pairs - existing.size();
  if (available <= count) {
    for (int u = 0; u < g.num_nodes; ++u)
      for (int v = undirected ? u + 1 : 0; v < g.num_nodes; ++v)
        if (u != v && !existing.count({u, v})) out.push_back({u, v});
    return out;
  }
  std::set<Edge> chosen;
  std::size_t attempts = 0, max_attempts = 10 * count;
  while (out.size() < count && attempts < max_attempts) {
    ++attempts;
    int u = static_cast<int>(rng.uniform_int(n));
    int v = static_cast<int>(rng.uniform_int(n));
    if (u == v) continue;
    Edge e = undirected ? Edge{std::min(u, v), std::max(u, v)} : Edge{u, v};
    if (existing.count(e) || !chosen.insert(e).second) continue;
    out.push_back(e);
  }
  return out;
}

HeadOutput AugmentationHeads::edge_perturbation(const Graph& g, const Tensor& node_reps, double temperature,
                                                Rng& rng) const {
  require_head_inputs(g, node_reps);
  bool undirected = g.is_symmetric();
  std::vector<Edge> candidates;
  for (auto& e : g.edges)
    if (!undirected || e.src <= e.dst) candidates.push_back(e);
  std::size_t positives = candidates.size();
  for (auto& e : sample_negative_edges(g, positives, undirected, rng)) candidates.push_back(e);

  HeadOutput out;
  out.graph.num_nodes = g.num_nodes;
  out.graph.feature_dim = g.feature_dim;
  out.graph.features = g.features;
  out.graph.label = g.label;
  out.graph.node_labels = g.node_labels;
  out.features = g.feature_tensor();
  out.kept_nodes.resize(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) out.kept_nodes[v] = v;
  if (candidates.empty()) {
    out.edge_weights = Tensor::zeros(0, 1);
    return out;
  }

  std::vector<int> heads, tails;
  std::vector<double> indicator;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    heads.push_back(candidates[c].src);
    tails.push_back(candidates[c].dst);
    indicator.push_back(c < positives ? 1.0 : 0.0);
  }
  Tensor edge_reps = concat_cols({add(gather_rows(node_reps, heads), gather_rows(node_reps, tails)),
                                  Tensor::column(std::move(indicator))});
  Tensor logits = edge_mlp_(edge_reps);
  Tensor probs = sigmoid(logits);
  BernoulliSample keep = relaxed_bernoulli(logits, temperature, rng);

  std::vector<int> weight_index;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!keep.hard[c]) continue;
    const Edge& e = candidates[c];
    out.graph.edges.push_back(e);
    weight_index.push_back(static_cast<int>(c));
    if (undirected && e.src != e.dst) {
      out.graph.edges.push_back({e.dst, e.src});
      weight_index.push_back(static_cast<int>(c));
    }
  }
  out.edge_weights = gather_rows(probs, weight_index);
  out.graph.edge_weights.assign(out.edge_weights.data().begin(), out.edge_weights.data().end());
  out.soft_params = {probs, keep.soft};
  return out;
}

HeadOutput AugmentationHeads::feature_masking(const Graph& g, const Tensor& node_reps, double temperature,
                                              Rng& rng) const {
  require_head_inputs(g, node_reps);
  AUGCL_REQUIRE(g.feature_dim >= 1, "feature masking needs at least one feature");
  Tensor projected = feature_projection_(g.feature_tensor());
  Tensor logits = feature_mask_mlp_(node_reps);
  BernoulliSample mask = relaxed_bernoulli(logits, temperature, rng);

  HeadOutput out;
  out.features = mul(projected, mask.straight_through);
  out.graph.num_nodes = g.num_nodes;
  out.graph.edges = g.edges;
  out.graph.edge_weights.assign(g.edges.size(), 1.0);
  out.graph.feature_dim = g.feature_dim;
  out.graph.features.assign(out.features.data().begin(), out.features.data().end());
  out.graph.label = g.label;
  out.graph.node_labels = g.node_labels;
  out.edge_weights = out.graph.weight_tensor();
  out.kept_nodes.resize(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) out.kept_nodes[v] = v;
  out.soft_params = {sigmoid(logits), mask.soft};
  return out;
}

HeadOutput identity_augmentation(const Graph& g) {
  HeadOutput out;
  out.graph = g;
  out.graph.edge_weights.assign(g.edges.size(), 1.0);
  out.features = g.feature_tensor();
  out.edge_weights = out.graph.weight_tensor();
  out.kept_nodes.resize(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) out.kept_nodes[v] = v;
  return out;
}

ViewBatch batch_views(const std::vector<HeadOutput>& views) {
  AUGCL_REQUIRE(!views.empty(), "batch_views: no views");
  std::vector<Graph> graphs;
  std::vector<Tensor> features, weights;
  for (auto& v : views) {
    graphs.push_back(v.graph);
    features.push_back(v.features);
    weights.push_back(v.edge_weights);
  }
  ViewBatch b;
  b.structure = batch_graphs(std::move(graphs));
  b.features = concat_rows(features);
  b.edge_weights = concat_rows(weights);
  return b;
}

}  // namespace augcl
