#pragma once

// Independent checks of augmentation-head outputs. Probabilities are
// recomputed from the raw head parameters rather than taken from the head.

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "augcl/heads.hpp"
#include "helpers.hpp"

namespace testutil {

using namespace augcl;

inline MLP mlp_from(const ParameterSet& params, const std::string& prefix) {
  MLP m;
  for (int i = 0; params.contains(prefix + "." + std::to_string(i) + ".weight"); ++i) {
    Linear l;
    l.weight = params.at(prefix + "." + std::to_string(i) + ".weight");
    l.bias = params.at(prefix + "." + std::to_string(i) + ".bias");
    m.layers.push_back(l);
  }
  return m;
}

/// Plain-loop MLP forward on one input row.
inline std::vector<double> mlp_row(const MLP& m, std::vector<double> x) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const Tensor& w = m.layers[l].weight;
    const Tensor& b = m.layers[l].bias;
    std::vector<double> y(w.cols());
    for (std::size_t c = 0; c < w.cols(); ++c) {
      double acc = b[c];
      for (std::size_t r = 0; r < w.rows(); ++r) acc += x[r] * w.at(r, c);
      y[c] = (l + 1 < m.layers.size()) ? std::max(acc, 0.0) : acc;
    }
    x = std::move(y);
  }
  return x;
}

inline std::vector<double> row_of(const Tensor& t, std::size_t r) {
  return {t.data().begin() + r * t.cols(), t.data().begin() + (r + 1) * t.cols()};
}

/// softmax over nodes of MLP([H_v || h_G]).
inline std::vector<double> node_softmax(const MLP& m, const Tensor& node_reps, const Tensor& graph_rep) {
  std::vector<double> logits;
  for (std::size_t v = 0; v < node_reps.rows(); ++v) {
    auto in = row_of(node_reps, v);
    auto g = row_of(graph_rep, 0);
    in.insert(in.end(), g.begin(), g.end());
    logits.push_back(mlp_row(m, in)[0]);
  }
  double mx = *std::max_element(logits.begin(), logits.end()), total = 0;
  for (auto& l : logits) total += (l = std::exp(l - mx));
  for (auto& l : logits) l /= total;
  return logits;
}

struct InvariantReport {
  std::vector<std::string> violations;
  void fail(const std::string& what) { violations.push_back(what); }
  bool ok() const { return violations.empty(); }
};

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

/// Checks shared by every head plus the head-specific formula.
inline InvariantReport check_head_output(AugmentationKind kind, const Graph& g, const Tensor& node_reps,
                                         const Tensor& graph_rep, const HeadOutput& out,
                                         const ParameterSet& head_params, const std::string& prefix,
                                         const HeadSettings& settings) {
  InvariantReport r;
  const Graph& o = out.graph;
  try {
    validate(o);
  } catch (const std::exception& e) {
    r.fail(std::string("graph invariant: ") + e.what());
    return r;
  }
  if (o.edge_weights.size() != o.edges.size()) r.fail("edge weights misaligned");
  if (out.edge_weights.numel() != o.edges.size()) r.fail("weight tensor size");
  for (std::size_t e = 0; e < o.edges.size() && e < out.edge_weights.numel(); ++e)
    if (out.edge_weights[e] != o.edge_weights[e]) r.fail("weight tensor differs from graph weights");
  if (out.features.rows() != static_cast<std::size_t>(o.num_nodes) || out.features.cols() != g.feature_dim)
    r.fail("feature tensor shape");
  if (o.feature_dim != g.feature_dim) r.fail("feature dim changed");
  if (out.kept_nodes.size() != static_cast<std::size_t>(o.num_nodes)) r.fail("kept node count");
  std::set<int> kept(out.kept_nodes.begin(), out.kept_nodes.end());
  if (kept.size() != out.kept_nodes.size()) r.fail("kept nodes repeat");
  for (int v : out.kept_nodes)
    if (v < 0 || v >= g.num_nodes) r.fail("kept node out of range");
  if (!r.ok()) return r;

  auto mapped_edges = [&]() {
    std::multiset<Edge> s;
    for (auto& e : o.edges) s.insert({out.kept_nodes[e.src], out.kept_nodes[e.dst]});
    return s;
  };
  auto induced_on_kept = [&]() {
    std::multiset<Edge> s;
    for (auto& e : g.edges)
      if (kept.count(e.src) && kept.count(e.dst)) s.insert(e);
    return s;
  };
  auto features_sliced = [&]() {
    for (int v = 0; v < o.num_nodes; ++v)
      for (std::size_t d = 0; d < g.feature_dim; ++d)
        if (o.feature(v, d) != g.feature(out.kept_nodes[v], d) || out.features.at(v, d) != o.feature(v, d))
          return false;
    return true;
  };
  auto pair_weight_formula = [&](const std::vector<double>& p) {
    for (std::size_t e = 0; e < o.edges.size(); ++e) {
      double expect = p[out.kept_nodes[o.edges[e].src]] + p[out.kept_nodes[o.edges[e].dst]];
      if (!close(o.edge_weights[e], expect)) return false;
    }
    return true;
  };

  switch (kind) {
    case AugmentationKind::NodeDrop: {
      if (o.num_nodes != keep_count(settings.keep_ratio, g.num_nodes)) r.fail("node drop: kept count");
      if (!std::is_sorted(out.kept_nodes.begin(), out.kept_nodes.end())) r.fail("node drop: ids not ascending");
      if (mapped_edges() != induced_on_kept()) r.fail("node drop: edges are not the induced subset");
      if (!features_sliced()) r.fail("node drop: features not sliced");
      auto p = node_softmax(mlp_from(head_params, prefix + ".node_drop"), node_reps, graph_rep);
      if (!pair_weight_formula(p)) r.fail("node drop: weight != p(u) + p(v)");
      break;
    }
    case AugmentationKind::SubGraph: {
      if (mapped_edges() != induced_on_kept()) r.fail("subgraph: edges are not the induced subset");
      if (!features_sliced()) r.fail("subgraph: features not sliced");
      if (!is_connected(o)) r.fail("subgraph: not connected");
      bool some_center = false;
      for (int c : out.kept_nodes) {
        auto dist = bfs_distances(g, c);
        std::set<int> ball;
        for (int v = 0; v < g.num_nodes; ++v)
          if (dist[v] >= 0 && dist[v] <= settings.hops) ball.insert(v);
        if (ball == kept) {
          some_center = true;
          break;
        }
      }
      if (!some_center) r.fail("subgraph: kept set is not a K-hop ball");
      auto p = node_softmax(mlp_from(head_params, prefix + ".subgraph"), node_reps, graph_rep);
      if (!pair_weight_formula(p)) r.fail("subgraph: weight != p(u) + p(v)");
      break;
    }
    case AugmentationKind::EdgePerturb: {
      if (o.num_nodes != g.num_nodes) r.fail("edge perturb: node count changed");
      if (!features_sliced()) r.fail("edge perturb: features changed");
      bool undirected = g.is_symmetric();
      if (undirected && !o.is_symmetric()) r.fail("edge perturb: symmetry lost");
      std::set<Edge> seen;
      MLP mlp = mlp_from(head_params, prefix + ".edge_perturb");
      for (std::size_t e = 0; e < o.edges.size(); ++e) {
        const Edge& ed = o.edges[e];
        if (!seen.insert(ed).second) r.fail("edge perturb: duplicate edge");
        bool existing = g.has_edge(ed.src, ed.dst);
        if (ed.src == ed.dst && !existing) r.fail("edge perturb: self loop added");
        auto hu = row_of(node_reps, ed.src), hv = row_of(node_reps, ed.dst);
        std::vector<double> in(hu.size());
        for (std::size_t k = 0; k < in.size(); ++k) in[k] = hu[k] + hv[k];
        in.push_back(existing ? 1.0 : 0.0);
        double p = 1.0 / (1.0 + std::exp(-mlp_row(mlp, in)[0]));
        if (!close(o.edge_weights[e], p)) r.fail("edge perturb: weight != p(e)");
      }
      break;
    }
    case AugmentationKind::FeatureMask: {
      if (o.num_nodes != g.num_nodes) r.fail("feature mask: node count changed");
      if (o.edges != g.edges) r.fail("feature mask: topology changed");
      for (double w : o.edge_weights)
        if (w != 1.0) r.fail("feature mask: weight != 1");
      const Tensor& pw = head_params.at(prefix + ".feature_mask.proj.weight");
      const Tensor& pb = head_params.at(prefix + ".feature_mask.proj.bias");
      for (int v = 0; v < g.num_nodes; ++v)
        for (std::size_t c = 0; c < g.feature_dim; ++c) {
          double proj = pb[c];
          for (std::size_t k = 0; k < g.feature_dim; ++k) proj += g.feature(v, k) * pw.at(k, c);
          double got = o.feature(v, c);
          if (got != 0.0 && !close(got, proj)) r.fail("feature mask: entry is neither 0 nor Linear(X)");
        }
      break;
    }
    case AugmentationKind::Identity: {
      if (o.edges != g.edges || o.num_nodes != g.num_nodes) r.fail("identity: structure changed");
      if (!features_sliced()) r.fail("identity: features changed");
      for (double w : o.edge_weights)
        if (w != 1.0) r.fail("identity: weight != 1");
      break;
    }
  }
  return r;
}

}  // namespace testutil
