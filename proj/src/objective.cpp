#include "augcl/objective.hpp"

#include <cmath>
#include <limits>

#include "augcl/errors.hpp"

namespace augcl {

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::JSD: return "jsd";
    case Estimator::NCE: return "nce";
    case Estimator::NTXent: return "nt-xent";
    case Estimator::DV: return "dv";
  }
  return "?";
}

std::optional<Estimator> parse_estimator(std::string_view name) {
  for (auto e : {Estimator::JSD, Estimator::NCE, Estimator::NTXent, Estimator::DV})
    if (estimator_name(e) == name) return e;
  if (name == "ntxent") return Estimator::NTXent;
  return std::nullopt;
}

std::string_view discriminator_name(DiscriminatorKind d) {
  switch (d) {
    case DiscriminatorKind::Dot: return "dot";
    case DiscriminatorKind::Cosine: return "cosine";
    case DiscriminatorKind::Bilinear: return "bilinear";
    case DiscriminatorKind::MLP: return "mlp";
  }
  return "?";
}

std::optional<DiscriminatorKind> parse_discriminator(std::string_view name) {
  for (auto d : {DiscriminatorKind::Dot, DiscriminatorKind::Cosine, DiscriminatorKind::Bilinear, DiscriminatorKind::MLP})
    if (discriminator_name(d) == name) return d;
  return std::nullopt;
}

void ObjectiveConfig::validate() const {
  if (estimator == Estimator::NTXent && !(nt_xent_temperature > 0))
    throw ConfigError("nt_xent_temperature", "must be positive");
}

Discriminator::Discriminator(ParameterSet& params, const std::string& prefix, DiscriminatorKind kind, std::size_t dim,
                             std::uint64_t seed)
    : kind_(kind) {
  if (kind == DiscriminatorKind::Bilinear) {
    bilinear_ = params.add(prefix + ".bilinear", xavier_init({dim, dim}, param_seed(seed, prefix + ".bilinear")));
  } else if (kind == DiscriminatorKind::MLP) {
    mlp_node_ = Linear(params, prefix + ".mlp.node", dim, dim, seed);
    // Graph half of the first layer; its bias would duplicate mlp_node_'s.
    mlp_graph_.weight = params.add(prefix + ".mlp.graph.weight",
                                   xavier_init({dim, dim}, param_seed(seed, prefix + ".mlp.graph.weight")));
    mlp_out_ = Linear(params, prefix + ".mlp.out", dim, 1, seed);
  }
}

Tensor Discriminator::score_all(const Tensor& nodes, const Tensor& graphs) const {
  AUGCL_REQUIRE(nodes.cols() == graphs.cols(), "discriminator: node and graph dims differ");
  switch (kind_) {
    case DiscriminatorKind::Dot:
      return matmul(nodes, transpose(graphs));
    case DiscriminatorKind::Cosine:
      return matmul(normalize_rows(nodes), transpose(normalize_rows(graphs)));
    case DiscriminatorKind::Bilinear:
      return matmul(matmul(nodes, bilinear_), transpose(graphs));
    case DiscriminatorKind::MLP: {
      std::size_t v = nodes.rows(), n = graphs.rows();
      Tensor a = mlp_node_(nodes);
      Tensor b = matmul(graphs, mlp_graph_.weight);
      std::vector<int> rep_nodes(v * n), rep_graphs(v * n);
      for (std::size_t i = 0; i < v; ++i)
        for (std::size_t k = 0; k < n; ++k) {
          rep_nodes[i * n + k] = static_cast<int>(i);
          rep_graphs[i * n + k] = static_cast<int>(k);
        }
      Tensor hidden = relu(add(gather_rows(a, rep_nodes), gather_rows(b, rep_graphs)));
      return reshape(mlp_out_(hidden), v, n);
    }
  }
  throw ContractViolation("unknown discriminator");
}

Tensor Discriminator::score(const Tensor& node_vec, const Tensor& graph_vec) const {
  AUGCL_REQUIRE(node_vec.rows() == 1 && graph_vec.rows() == 1, "discriminator: expected single vectors");
  return score_all(node_vec, graph_vec);
}

Tensor discriminate(const Tensor& node_vec, const Tensor& graph_vec, const Discriminator& d) {
  return d.score(node_vec, graph_vec);
}

Tensor jsd_mi(const Tensor& positives, const Tensor& negatives) {
  AUGCL_REQUIRE(positives.numel() > 0, "jsd_mi: no positive scores");
  Tensor pos_term = neg(mean(softplus(neg(positives))));
  if (negatives.numel() == 0) return pos_term;
  return sub(pos_term, mean(softplus(negatives)));
}

Tensor nce_mi(const Tensor& scores, std::span<const int> positive_col) {
  AUGCL_REQUIRE(scores.rows() == positive_col.size(), "nce_mi: one positive column per row");
  AUGCL_REQUIRE(scores.cols() >= 2, "nce_mi: needs at least one negative per positive");
  std::vector<double> mask(scores.numel(), 0.0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    AUGCL_REQUIRE(positive_col[r] >= 0 && static_cast<std::size_t>(positive_col[r]) < scores.cols(),
                  "nce_mi: positive column out of range");
    mask[r * scores.cols() + positive_col[r]] = 1.0;
  }
  Tensor pos = sum(mul(scores, Tensor(scores.shape(), std::move(mask))), 1);
  return mean(sub(pos, logsumexp(scores, 1)));
}

Tensor dv_mi(const Tensor& positives, const Tensor& negatives) {
  AUGCL_REQUIRE(positives.numel() > 0, "dv_mi: no positive scores");
  AUGCL_REQUIRE(negatives.numel() > 0, "dv_mi: needs negative scores");
  // log mean exp(x) = logsumexp(x) - log n
  Tensor flat = reshape(negatives, 1, negatives.numel());
  Tensor log_mean_exp = add_scalar(logsumexp(flat, 1), -std::log(static_cast<double>(negatives.numel())));
  return sub(mean(positives), log_mean_exp);
}

namespace {

// Splits a square score matrix into diagonal and off-diagonal column vectors.
std::pair<Tensor, Tensor> split_diagonal(const Tensor& s) {
  std::size_t n = s.rows();
  std::vector<int> diag, off;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) (r == c ? diag : off).push_back(static_cast<int>(r * n + c));
  Tensor flat = reshape(s, n * n, 1);
  Tensor pos = gather_rows(flat, diag);
  Tensor negs = off.empty() ? Tensor::zeros(0, 1) : gather_rows(flat, off);
  return {pos, negs};
}

}  // namespace

Tensor estimate_mi(const Tensor& s, const ObjectiveConfig& config) {
  AUGCL_REQUIRE(s.rows() == s.cols() && s.rows() >= 1, "estimate_mi: expected a non-empty square score matrix");
  std::size_t n = s.rows();
  std::vector<int> diag(n);
  for (std::size_t r = 0; r < n; ++r) diag[r] = static_cast<int>(r);
  switch (config.estimator) {
    case Estimator::JSD: {
      auto [pos, negs] = split_diagonal(s);
      return jsd_mi(pos, negs);
    }
    case Estimator::NCE:
      AUGCL_REQUIRE(n >= 2, "NCE estimator needs a batch of at least two graphs");
      return nce_mi(s, diag);
    case Estimator::NTXent:
      AUGCL_REQUIRE(n >= 2, "NT-Xent estimator needs a batch of at least two graphs");
      return nce_mi(mul_scalar(s, 1.0 / config.nt_xent_temperature), diag);
    case Estimator::DV: {
      AUGCL_REQUIRE(n >= 2, "DV estimator needs a batch of at least two graphs");
      auto [pos, negs] = split_diagonal(s);
      return dv_mi(pos, negs);
    }
  }
  throw ContractViolation("unknown estimator");
}

Tensor score_matrix(const Tensor& node_matrix, const Tensor& graph_matrix, const GraphBatch& node_structure,
                    const Discriminator& d) {
  AUGCL_REQUIRE(node_matrix.rows() == static_cast<std::size_t>(node_structure.total_nodes),
                "score_matrix: node rows differ from batch node count");
  Tensor all = d.score_all(node_matrix, graph_matrix);                   // V x N
  Tensor per_graph = readout(all, node_structure, Readout::Mean);        // N' x N, row = node graph
  return transpose(per_graph);                                            // (graph k, nodes of k')
}

Tensor batch_loss(const Tensor& nodes_i, const Tensor& graphs_i, const GraphBatch& structure_i,
                  const Tensor& nodes_j, const Tensor& graphs_j, const GraphBatch& structure_j,
                  const Discriminator& d, const ObjectiveConfig& config) {
  AUGCL_REQUIRE(structure_i.size() == structure_j.size(), "batch_loss: views differ in batch size");
  AUGCL_REQUIRE(graphs_i.rows() == structure_i.size() && graphs_j.rows() == structure_j.size(),
                "batch_loss: one graph vector per batch graph");
  Tensor mi_ij = estimate_mi(score_matrix(nodes_j, graphs_i, structure_j, d), config);
  Tensor mi_ji = estimate_mi(score_matrix(nodes_i, graphs_j, structure_i, d), config);
  return mul_scalar(add(mi_ij, mi_ji), -0.5);
}

}  // namespace augcl
