#include "augcl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "augcl/errors.hpp"

namespace augcl {

std::string_view augmentation_name(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::NodeDrop: return "node_drop";
    case AugmentationKind::EdgePerturb: return "edge_perturb";
    case AugmentationKind::SubGraph: return "subgraph";
    case AugmentationKind::FeatureMask: return "feature_mask";
    case AugmentationKind::Identity: return "identity";
  }
  return "?";
}

std::optional<AugmentationKind> parse_augmentation(std::string_view name) {
  for (auto k : kAllAugmentations)
    if (augmentation_name(k) == name) return k;
  return std::nullopt;
}

std::vector<AugmentationKind> active_augmentations(bool node_task) {
  std::vector<AugmentationKind> out;
  for (auto k : kAllAugmentations)
    if (!(node_task && k == AugmentationKind::SubGraph)) out.push_back(k);
  return out;
}

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::GRU: return "gru";
    case PolicyKind::DeepSet: return "deepset";
    case PolicyKind::Random: return "random";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (auto k : {PolicyKind::GRU, PolicyKind::DeepSet, PolicyKind::Random})
    if (policy_name(k) == name) return k;
  return std::nullopt;
}

GRUCell::GRUCell(ParameterSet& params, const std::string& name, std::size_t input, std::size_t hidden_size,
                 std::uint64_t seed)
    : input_gates(params, name + ".input", input, 3 * hidden_size, seed),
      hidden_gates(params, name + ".hidden", hidden_size, 3 * hidden_size, seed),
      hidden(hidden_size) {}

Tensor GRUCell::step(const Tensor& x, const Tensor& h) const {
  Tensor gx = input_gates(x);
  Tensor gh = hidden_gates(h);
  Tensor r = sigmoid(add(slice_cols(gx, 0, hidden), slice_cols(gh, 0, hidden)));
  Tensor z = sigmoid(add(slice_cols(gx, hidden, hidden), slice_cols(gh, hidden, hidden)));
  Tensor n = tanh(add(slice_cols(gx, 2 * hidden, hidden), mul(r, slice_cols(gh, 2 * hidden, hidden))));
  // (1 - z) * n + z * h
  return add(mul(add_scalar(neg(z), 1.0), n), mul(z, h));
}

std::vector<int> norm_sort_order(const Tensor& rows) {
  std::size_t n = rows.rows(), d = rows.cols();
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += rows.at(i, j) * rows.at(i, j);
    norms[i] = std::sqrt(s);
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (norms[a] != norms[b]) return norms[a] < norms[b];
    for (std::size_t j = 0; j < d; ++j)
      if (rows.at(a, j) != rows.at(b, j)) return rows.at(a, j) < rows.at(b, j);
    return a < b;
  });
  return order;
}

Policy::Policy(ParameterSet& params, const std::string& prefix, PolicyKind kind, std::size_t hidden_dim,
               std::size_t num_kinds, std::uint64_t seed)
    : kind_(kind), num_kinds_(num_kinds) {
  AUGCL_REQUIRE(num_kinds >= 1, "policy needs at least one augmentation");
  if (kind == PolicyKind::GRU) {
    gru_ = GRUCell(params, prefix + ".gru", hidden_dim, hidden_dim, seed);
    gru_out_ = Linear(params, prefix + ".out", hidden_dim, num_kinds, seed);
  } else if (kind == PolicyKind::DeepSet) {
    set_encoder_ = MLP(params, prefix + ".phi", {hidden_dim, hidden_dim, hidden_dim}, seed);
    set_decoder_ = MLP(params, prefix + ".rho", {hidden_dim, hidden_dim, num_kinds}, seed);
  }
}

Tensor Policy::logits(const Tensor& batch_reps) const {
  AUGCL_REQUIRE(batch_reps.rows() >= 1, "policy: empty batch");
  switch (kind_) {
    case PolicyKind::GRU: {
      auto order = norm_sort_order(batch_reps);
      Tensor sorted = gather_rows(batch_reps, order);
      Tensor h = Tensor::zeros(1, gru_.hidden);
      for (std::size_t t = 0; t < sorted.rows(); ++t) h = gru_.step(slice_rows(sorted, t, 1), h);
      return gru_out_(h);
    }
    case PolicyKind::DeepSet: {
      Tensor pooled = sum(set_encoder_(batch_reps), 0);
      return set_decoder_(pooled);
    }
    case PolicyKind::Random:
      return Tensor::zeros(1, num_kinds_);
  }
  return {};
}

Tensor Policy::distribution(const Tensor& batch_reps) const {
  if (kind_ == PolicyKind::Random) return Tensor::full(1, num_kinds_, 1.0 / static_cast<double>(num_kinds_));
  return softmax(logits(batch_reps), 1);
}

Tensor Policy::gru_distribution(const Tensor& batch_reps) const {
  AUGCL_REQUIRE(kind_ == PolicyKind::GRU, "policy is not a GRU policy");
  return distribution(batch_reps);
}

Tensor Policy::deepset_distribution(const Tensor& batch_reps) const {
  AUGCL_REQUIRE(kind_ == PolicyKind::DeepSet, "policy is not a DeepSet policy");
  return distribution(batch_reps);
}

PolicyDecision Policy::decide(const Tensor& batch_reps, const std::vector<AugmentationKind>& active,
                              double temperature, Rng& rng) const {
  AUGCL_REQUIRE(active.size() == num_kinds_, "decide: active set size differs from policy output size");
  PolicyDecision d;
  d.active = active;
  Tensor lg = logits(batch_reps);
  d.dist = kind_ == PolicyKind::Random ? Tensor::full(1, num_kinds_, 1.0 / static_cast<double>(num_kinds_))
                                       : softmax(lg, 1);
  CategoricalSample si = gumbel_softmax(lg, temperature, rng);
  CategoricalSample sj = gumbel_softmax(lg, temperature, rng);
  d.i_slot = static_cast<std::size_t>(si.index);
  d.j_slot = static_cast<std::size_t>(sj.index);
  d.i = active[d.i_slot];
  d.j = active[d.j_slot];
  d.p_i = mul(element(d.dist, 0, d.i_slot), element(si.straight_through, 0, d.i_slot));
  d.p_j = mul(element(d.dist, 0, d.j_slot), element(sj.straight_through, 0, d.j_slot));
  return d;
}

Tensor scale_by_policy(const Tensor& graph_vectors, const Tensor& p) {
  AUGCL_REQUIRE(p.is_scalar(), "scale_by_policy: probability must be a scalar");
  double v = p.item();
  AUGCL_REQUIRE(v >= 0.0 && v <= 1.0, "scale_by_policy: probability outside [0, 1]");
  if (v == 0.0) std::cerr << "warning: scale_by_policy with p = 0 zeroes the graph representation\n";
  return mul(graph_vectors, p);
}

}  // namespace augcl
