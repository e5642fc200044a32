#include "augcl/nn.hpp"

#include "augcl/errors.hpp"

namespace augcl {

std::uint64_t param_seed(std::uint64_t seed, const std::string& name) { return Rng(seed).split(name).next_u64(); }

Linear::Linear(ParameterSet& params, const std::string& name, std::size_t in, std::size_t out, std::uint64_t seed) {
  weight = params.add(name + ".weight", xavier_init({in, out}, param_seed(seed, name + ".weight")));
  bias = params.add(name + ".bias", Tensor::zeros(1, out, true));
}

MLP::MLP(ParameterSet& params, const std::string& name, const std::vector<std::size_t>& dims, std::uint64_t seed) {
  AUGCL_REQUIRE(dims.size() >= 2, "MLP needs at least input and output dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i)
    layers.emplace_back(params, name + "." + std::to_string(i), dims[i], dims[i + 1], seed);
}

Tensor MLP::operator()(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    if (i + 1 < layers.size()) h = relu(h);
  }
  return h;
}

Tensor dropout(const Tensor& x, double p, Rng* rng) {
  if (rng == nullptr || p <= 0.0) return x;
  AUGCL_REQUIRE(p < 1.0, "dropout probability must be < 1");
  std::vector<double> mask(x.numel());
  for (auto& m : mask) m = rng->uniform() < p ? 0.0 : 1.0 / (1.0 - p);
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

}  // namespace augcl
