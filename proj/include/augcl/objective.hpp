#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "augcl/encoder.hpp"
#include "augcl/nn.hpp"

namespace augcl {

enum class Estimator { JSD, NCE, NTXent, DV };
enum class DiscriminatorKind { Dot, Cosine, Bilinear, MLP };

std::string_view estimator_name(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view name);
std::string_view discriminator_name(DiscriminatorKind d);
std::optional<DiscriminatorKind> parse_discriminator(std::string_view name);

struct ObjectiveConfig {
  Estimator estimator = Estimator::JSD;
  DiscriminatorKind discriminator = DiscriminatorKind::Dot;
  double nt_xent_temperature = 0.5;

  void validate() const;
};

/// Scores agreement between node and graph representations.
class Discriminator {
 public:
  Discriminator() = default;
  /// Registers parameters only for the Bilinear and MLP kinds.
  Discriminator(ParameterSet& params, const std::string& prefix, DiscriminatorKind kind, std::size_t dim,
                std::uint64_t seed);

  /// Score of one node vector against one graph vector (both 1 x d).
  Tensor score(const Tensor& node_vec, const Tensor& graph_vec) const;
  /// All pairs: entry (v, k) scores node row v against graph row k.
  Tensor score_all(const Tensor& nodes, const Tensor& graphs) const;

  DiscriminatorKind kind() const { return kind_; }
  const Tensor& bilinear_weight() const { return bilinear_; }

 private:
  DiscriminatorKind kind_ = DiscriminatorKind::Dot;
  Tensor bilinear_;
  Linear mlp_node_;   // first MLP layer split into node and graph halves
  Linear mlp_graph_;  // (bias lives in mlp_node_)
  Linear mlp_out_;
};

/// Free-function form of the discriminator.
Tensor discriminate(const Tensor& node_vec, const Tensor& graph_vec, const Discriminator& d);

/// Jensen-Shannon lower bound: mean(-softplus(-pos)) - mean(softplus(neg)).
Tensor jsd_mi(const Tensor& pos, const Tensor& neg);
/// InfoNCE. Row r of `scores` holds one anchor's candidates and `positive_col[r]`
/// marks its positive: mean_r [s_r,pos - logsumexp_c s_r,c].
Tensor nce_mi(const Tensor& scores, std::span<const int> positive_col);
/// Donsker-Varadhan: mean(pos) - log(mean(exp(neg))), max-shifted.
Tensor dv_mi(const Tensor& pos, const Tensor& neg);

/// Estimator over a square score matrix with positives on the diagonal.
Tensor estimate_mi(const Tensor& score_matrix, const ObjectiveConfig& config);

/// s(k, k') = mean over nodes v of graph k' in one view of D(h_v, h_{G_k}) of the other view.
Tensor score_matrix(const Tensor& node_matrix, const Tensor& graph_matrix, const GraphBatch& node_structure,
                    const Discriminator& d);

/// Local-global loss for two views of the same batch:
/// -(I(nodes_j, graphs_i) + I(nodes_i, graphs_j)) / 2.
Tensor batch_loss(const Tensor& nodes_i, const Tensor& graphs_i, const GraphBatch& structure_i,
                  const Tensor& nodes_j, const Tensor& graphs_j, const GraphBatch& structure_j,
                  const Discriminator& d, const ObjectiveConfig& config);

}  // namespace augcl
