#pragma once

#include <string>
#include <vector>

#include "augcl/graph.hpp"
#include "augcl/nn.hpp"

namespace augcl {

enum class LayerKind { GIN, GCN };
enum class Readout { Sum, Mean };

struct EncoderConfig {
  LayerKind layer_kind = LayerKind::GIN;
  int num_layers = 2;
  std::size_t hidden_dim = 32;
  std::size_t input_dim = 1;
  double dropout = 0.0;
  Readout readout = Readout::Sum;

  void validate() const;
};

/// Output of an encoder over a batch. `node_matrix` and `graph_matrix` are the
/// projected encodings used by the objective and the augmentation modules;
/// `node_embedding` and `graph_embedding` are the read-out values before the
/// projection heads, used for downstream probes.
struct Encodings {
  Tensor node_matrix;   // total_nodes x d_h
  Tensor graph_matrix;  // num_graphs x d_h
  Tensor node_embedding;
  Tensor graph_embedding;
};

/// h'_v = MLP((1 + eps) h_v + sum_{(u,v) in E} w_uv h_u)
Tensor gin_layer(const Tensor& node_states, const GraphBatch& structure, const Tensor& edge_weights, double eps,
                 const MLP& mlp);

/// h' = ReLU(D^-1/2 (A_w + I) D^-1/2 H W), degrees taken over incoming weights.
Tensor gcn_layer(const Tensor& node_states, const GraphBatch& structure, const Tensor& edge_weights,
                 const Tensor& weight);

/// Per-graph sum (or mean) of node rows, accumulated in ascending node order.
Tensor readout(const Tensor& node_states, const GraphBatch& structure, Readout kind);

class GraphEncoder {
 public:
  GraphEncoder() = default;
  GraphEncoder(ParameterSet& params, const std::string& prefix, const EncoderConfig& config, std::uint64_t seed);

  /// `dropout_rng` non-null enables training-mode dropout between layers.
  Encodings encode(const GraphBatch& structure, const Tensor& features, const Tensor& edge_weights,
                   Rng* dropout_rng = nullptr) const;
  /// Encodes the batch's own features and weights (constants).
  Encodings encode(const GraphBatch& batch) const;

  const EncoderConfig& config() const { return config_; }

 private:
  EncoderConfig config_;
  std::vector<MLP> gin_mlps_;
  std::vector<Tensor> gcn_weights_;
  MLP node_projection_;
  MLP graph_projection_;
};

}  // namespace augcl
