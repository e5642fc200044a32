#include "augcl/encoder.hpp"

#include "augcl/errors.hpp"

namespace augcl {

void EncoderConfig::validate() const {
  if (num_layers < 1) throw ConfigError("num_layers", "must be >= 1");
  if (hidden_dim < 1) throw ConfigError("hidden_dim", "must be >= 1");
  if (input_dim < 1) throw ConfigError("input_dim", "must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout", "must be in [0, 1)");
}

Tensor gin_layer(const Tensor& node_states, const GraphBatch& structure, const Tensor& edge_weights, double eps,
                 const MLP& mlp) {
  AUGCL_REQUIRE(node_states.rows() == static_cast<std::size_t>(structure.total_nodes), "gin_layer: node count mismatch");
  AUGCL_REQUIRE(edge_weights.numel() == static_cast<std::size_t>(structure.total_edges), "gin_layer: edge weight count mismatch");
  Tensor combined = eps == 0.0 ? node_states : mul_scalar(node_states, 1.0 + eps);
  if (structure.total_edges > 0) {
    Tensor messages = mul(gather_rows(node_states, structure.src), edge_weights);
    combined = add(combined, scatter_add_rows(messages, structure.dst, node_states.rows()));
  }
  return mlp(combined);
}

Tensor gcn_layer(const Tensor& node_states, const GraphBatch& structure, const Tensor& edge_weights,
                 const Tensor& weight) {
  AUGCL_REQUIRE(node_states.rows() == static_cast<std::size_t>(structure.total_nodes), "gcn_layer: node count mismatch");
  Tensor transformed = matmul(node_states, weight);
  std::size_t n = node_states.rows();
  Tensor degree = Tensor::ones(n, 1);
  if (structure.total_edges > 0) degree = add(degree, scatter_add_rows(edge_weights, structure.dst, n));
  Tensor inv_sqrt = pow_scalar(degree, -0.5);
  Tensor out = mul(transformed, pow_scalar(degree, -1.0));
  if (structure.total_edges > 0) {
    Tensor coef = mul(mul(edge_weights, gather_rows(inv_sqrt, structure.src)), gather_rows(inv_sqrt, structure.dst));
    Tensor messages = mul(gather_rows(transformed, structure.src), coef);
    out = add(out, scatter_add_rows(messages, structure.dst, n));
  }
  return relu(out);
}

Tensor readout(const Tensor& node_states, const GraphBatch& structure, Readout kind) {
  Tensor pooled = scatter_add_rows(node_states, structure.node_to_graph, structure.size());
  if (kind == Readout::Sum) return pooled;
  std::vector<double> inv(structure.size());
  for (std::size_t k = 0; k < structure.size(); ++k) inv[k] = 1.0 / structure.graph_nodes(k);
  return mul(pooled, Tensor::column(std::move(inv)));
}

GraphEncoder::GraphEncoder(ParameterSet& params, const std::string& prefix, const EncoderConfig& config,
                           std::uint64_t seed)
    : config_(config) {
  config_.validate();
  std::size_t d = config_.hidden_dim;
  for (int l = 0; l < config_.num_layers; ++l) {
    std::size_t in = l == 0 ? config_.input_dim : d;
    std::string name = prefix + ".layer" + std::to_string(l);
    if (config_.layer_kind == LayerKind::GIN) {
      gin_mlps_.emplace_back(params, name, std::vector<std::size_t>{in, d, d}, seed);
    } else {
      gcn_weights_.push_back(params.add(name + ".weight", xavier_init({in, d}, param_seed(seed, name + ".weight"))));
    }
  }
  node_projection_ = MLP(params, prefix + ".node_proj", {d, d, d, d}, seed);
  graph_projection_ = MLP(params, prefix + ".graph_proj", {d, d, d, d}, seed);
}

Encodings GraphEncoder::encode(const GraphBatch& structure, const Tensor& features, const Tensor& edge_weights,
                               Rng* dropout_rng) const {
  AUGCL_REQUIRE(structure.size() > 0, "encode: empty batch");
  if (features.cols() != config_.input_dim)
    throw InvalidShape("encode: feature dim " + std::to_string(features.cols()) + " but encoder expects " +
                       std::to_string(config_.input_dim));
  Tensor h = features;
  for (int l = 0; l < config_.num_layers; ++l) {
    if (config_.layer_kind == LayerKind::GIN) {
      h = relu(gin_layer(h, structure, edge_weights, 0.0, gin_mlps_[l]));
    } else {
      h = gcn_layer(h, structure, edge_weights, gcn_weights_[l]);
    }
    if (l + 1 < config_.num_layers) h = dropout(h, config_.dropout, dropout_rng);
  }
  Encodings out;
  out.node_embedding = h;
  out.graph_embedding = readout(h, structure, config_.readout);
  out.node_matrix = node_projection_(out.node_embedding);
  out.graph_matrix = graph_projection_(out.graph_embedding);
  return out;
}

Encodings GraphEncoder::encode(const GraphBatch& batch) const {
  return encode(batch, batch.feature_tensor(), batch.weight_tensor(), nullptr);
}

}  // namespace augcl
