#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "augcl/nn.hpp"
#include "augcl/sampling.hpp"

namespace augcl {

enum class AugmentationKind { NodeDrop = 0, EdgePerturb = 1, SubGraph = 2, FeatureMask = 3, Identity = 4 };
inline constexpr std::size_t kNumAugmentations = 5;
inline constexpr std::array<AugmentationKind, kNumAugmentations> kAllAugmentations{
    AugmentationKind::NodeDrop, AugmentationKind::EdgePerturb, AugmentationKind::SubGraph,
    AugmentationKind::FeatureMask, AugmentationKind::Identity};

std::string_view augmentation_name(AugmentationKind kind);
std::optional<AugmentationKind> parse_augmentation(std::string_view name);

/// Active augmentation set: all five for graph tasks, SubGraph removed for node tasks.
std::vector<AugmentationKind> active_augmentations(bool node_task);

enum class PolicyKind { GRU, DeepSet, Random };
std::string_view policy_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view name);

struct PolicyDecision {
  Tensor dist;  // 1 x |active|
  std::vector<AugmentationKind> active;
  AugmentationKind i = AugmentationKind::Identity;
  AugmentationKind j = AugmentationKind::Identity;
  std::size_t i_slot = 0;  // positions of i, j inside `active`
  std::size_t j_slot = 0;
  Tensor p_i;  // 1x1, forward value dist[i]
  Tensor p_j;
};

/// Single-layer GRU, hidden size d_h, zero initial state.
struct GRUCell {
  Linear input_gates;   // d_in -> 3 d_h (reset | update | candidate)
  Linear hidden_gates;  // d_h -> 3 d_h
  std::size_t hidden = 0;

  GRUCell() = default;
  GRUCell(ParameterSet& params, const std::string& name, std::size_t input, std::size_t hidden, std::uint64_t seed);
  Tensor step(const Tensor& x, const Tensor& h) const;
};

/// Orders rows ascending by L2 norm; equal norms are ordered by row contents
/// and then by original index, so the order depends only on the row multiset.
std::vector<int> norm_sort_order(const Tensor& rows);

class Policy {
 public:
  Policy() = default;
  Policy(ParameterSet& params, const std::string& prefix, PolicyKind kind, std::size_t hidden_dim,
         std::size_t num_kinds, std::uint64_t seed);

  /// Probability vector (1 x num_kinds) for a batch of N x d_h representations.
  Tensor distribution(const Tensor& batch_reps) const;
  Tensor gru_distribution(const Tensor& batch_reps) const;
  Tensor deepset_distribution(const Tensor& batch_reps) const;

  /// Distribution plus two independent Gumbel-Softmax draws (i == j allowed).
  PolicyDecision decide(const Tensor& batch_reps, const std::vector<AugmentationKind>& active, double temperature,
                        Rng& rng) const;

  PolicyKind kind() const { return kind_; }
  std::size_t num_kinds() const { return num_kinds_; }

 private:
  Tensor logits(const Tensor& batch_reps) const;

  PolicyKind kind_ = PolicyKind::GRU;
  std::size_t num_kinds_ = kNumAugmentations;
  GRUCell gru_;
  Linear gru_out_;
  MLP set_encoder_;
  MLP set_decoder_;
};

/// h_G scaled elementwise by the view probability; gradient reaches p.
Tensor scale_by_policy(const Tensor& graph_vectors, const Tensor& p);

}  // namespace augcl
