#include "naive_loss.hpp"

#include <cmath>
#include <stdexcept>

namespace naive {

namespace {

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double value(const augcl::ParameterSet& params, const std::string& name, std::size_t r, std::size_t c) {
  return params.at(name).at(r, c);
}

// Mutual-information estimate from an N x N score matrix, positives on the diagonal.
double estimate(const Matrix& s, const augcl::ObjectiveConfig& config) {
  std::size_t n = s.size();
  using augcl::Estimator;
  if (config.estimator == Estimator::JSD) {
    double pos = 0, neg = 0;
    std::size_t neg_count = 0;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t m = 0; m < n; ++m) {
        if (k == m) {
          pos += -softplus(-s[k][m]);
        } else {
          neg += softplus(s[k][m]);
          ++neg_count;
        }
      }
    double result = pos / n;
    if (neg_count > 0) result -= neg / neg_count;
    return result;
  }
  if (n < 2) throw std::invalid_argument("estimator needs negatives");
  if (config.estimator == Estimator::DV) {
    double pos = 0, neg = 0;
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t m = 0; m < n; ++m) {
        if (k == m)
          pos += s[k][m];
        else
          neg += std::exp(s[k][m]);
      }
    return pos / n - std::log(neg / static_cast<double>(n * (n - 1)));
  }
  double scale = config.estimator == Estimator::NTXent ? 1.0 / config.nt_xent_temperature : 1.0;
  double total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double denom = 0;
    for (std::size_t m = 0; m < n; ++m) denom += std::exp(scale * s[k][m]);
    total += scale * s[k][k] - std::log(denom);
  }
  return total / n;
}

double direction(const Matrix& graphs, const Matrix& nodes, const std::vector<int>& node_graph,
                 const augcl::ObjectiveConfig& config, const augcl::ParameterSet& params, const std::string& prefix) {
  std::size_t n = graphs.size();
  Matrix s(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t m = 0; m < n; ++m) {
      double acc = 0;
      int count = 0;
      for (std::size_t v = 0; v < nodes.size(); ++v) {
        if (node_graph[v] != static_cast<int>(m)) continue;
        acc += discriminator_score(nodes[v], graphs[k], config.discriminator, params, prefix);
        ++count;
      }
      s[k][m] = acc / count;
    }
  }
  return estimate(s, config);
}

}  // namespace

Matrix to_matrix(const augcl::Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
  return m;
}

double discriminator_score(const std::vector<double>& node, const std::vector<double>& graph,
                           augcl::DiscriminatorKind kind, const augcl::ParameterSet& params,
                           const std::string& prefix) {
  using augcl::DiscriminatorKind;
  std::size_t d = node.size();
  switch (kind) {
    case DiscriminatorKind::Dot:
      return dot(node, graph);
    case DiscriminatorKind::Cosine: {
      double a = std::sqrt(dot(node, node)), b = std::sqrt(dot(graph, graph));
      if (a == 0 || b == 0) return 0.0;
      return dot(node, graph) / (a * b);
    }
    case DiscriminatorKind::Bilinear: {
      double s = 0;
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t c = 0; c < d; ++c) s += node[r] * value(params, prefix + ".bilinear", r, c) * graph[c];
      return s;
    }
    case DiscriminatorKind::MLP: {
      double out = value(params, prefix + ".mlp.out.bias", 0, 0);
      for (std::size_t h = 0; h < d; ++h) {
        double pre = value(params, prefix + ".mlp.node.bias", 0, h);
        for (std::size_t k = 0; k < d; ++k) {
          pre += node[k] * value(params, prefix + ".mlp.node.weight", k, h);
          pre += graph[k] * value(params, prefix + ".mlp.graph.weight", k, h);
        }
        out += std::max(pre, 0.0) * value(params, prefix + ".mlp.out.weight", h, 0);
      }
      return out;
    }
  }
  throw std::invalid_argument("unknown discriminator");
}

double batch_loss(const Matrix& nodes_i, const Matrix& graphs_i, const std::vector<int>& node_graph_i,
                  const Matrix& nodes_j, const Matrix& graphs_j, const std::vector<int>& node_graph_j,
                  const augcl::ObjectiveConfig& config, const augcl::ParameterSet& params, const std::string& prefix) {
  double mi_ij = direction(graphs_i, nodes_j, node_graph_j, config, params, prefix);
  double mi_ji = direction(graphs_j, nodes_i, node_graph_i, config, params, prefix);
  return -0.5 * (mi_ij + mi_ji);
}

}  // namespace naive
