#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "augcl/params.hpp"
#include "augcl/rng.hpp"

namespace augcl {

/// Seeds derive from (seed, parameter name) so initialization does not depend
/// on construction order.
std::uint64_t param_seed(std::uint64_t seed, const std::string& name);

struct Linear {
  Tensor weight;  // in x out
  Tensor bias;    // 1 x out

  Linear() = default;
  Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed);
  Tensor operator()(const Tensor& x) const { return add(matmul(x, weight), bias); }
  std::size_t in_dim() const { return weight.rows(); }
  std::size_t out_dim() const { return weight.cols(); }
};

/// Linear layers with ReLU between them (none after the last).
struct MLP {
  std::vector<Linear> layers;

  MLP() = default;
  MLP(ParameterSet& params, const std::string& name, const std::vector<std::size_t>& dims, std::uint64_t seed);
  Tensor operator()(const Tensor& x) const;
};

/// Inverted dropout; identity when `rng` is null or p == 0.
Tensor dropout(const Tensor& x, double p, Rng* rng);

}  // namespace augcl
