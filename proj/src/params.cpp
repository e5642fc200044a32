#include "augcl/params.hpp"

#include <cmath>

#include "augcl/errors.hpp"
#include "augcl/rng.hpp"

namespace augcl {

Tensor xavier_init(const Shape& shape, std::uint64_t seed) {
  if (shape.empty()) throw InvalidShape("xavier_init: shape needs at least one dimension");
  for (auto d : shape)
    if (d == 0) throw InvalidShape("xavier_init: zero-sized dimension in " + shape_str(shape));
  double fan_in, fan_out;
  if (shape.size() == 1) {
    fan_in = fan_out = static_cast<double>(shape[0]);
  } else {
    double receptive = 1.0;
    for (std::size_t i = 2; i < shape.size(); ++i) receptive *= static_cast<double>(shape[i]);
    fan_in = static_cast<double>(shape[0]) * receptive;
    fan_out = static_cast<double>(shape[1]) * receptive;
  }
  double bound = std::sqrt(6.0 / (fan_in + fan_out));
  Rng rng(seed);
  std::vector<double> data(shape_numel(shape));
  for (auto& v : data) v = rng.uniform(-bound, bound);
  return Tensor(shape, std::move(data), true);
}

Tensor& ParameterSet::add(const std::string& name, Tensor value) {
  if (params_.count(name)) throw ContractViolation("duplicate parameter name: " + name);
  return params_.emplace(name, std::move(value)).first->second;
}

Tensor& ParameterSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractViolation("unknown parameter: " + name);
  return it->second;
}

const Tensor& ParameterSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractViolation("unknown parameter: " + name);
  return it->second;
}

void ParameterSet::replace(const std::string& name, Tensor value) {
  Tensor& slot = at(name);
  if (slot.shape() != value.shape()) throw InvalidShape("replace: shape mismatch for " + name);
  slot = std::move(value);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (auto& [_, t] : params_) n += t.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, t] : params_) t.zero_grad();
}

GradMap backward(const Tensor& loss, ParameterSet& params) {
  params.zero_grad();
  loss.backward();
  GradMap grads;
  for (auto& [name, t] : params) grads[name] = t.grad();
  return grads;
}

void adam_step(ParameterSet& params, const GradMap& grads, AdamState& state, double lr) {
  ++state.step;
  for (auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    if (g.size() != p.numel()) throw ContractViolation("adam_step: gradient shape mismatch for " + name);
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.empty()) m.assign(g.size(), 0.0);
    if (v.empty()) v.assign(g.size(), 0.0);
    if (m.size() != g.size() || v.size() != g.size())
      throw ContractViolation("adam_step: moment shape mismatch for " + name);
    auto t = ++state.param_steps[name];
    double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
    double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
    auto data = p.mutable_data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      double mhat = m[i] / c1;
      double vhat = v[i] / c2;
      data[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

double clip_grad_norm(GradMap& grads, double max_norm) {
  double sq = 0.0;
  for (auto& [_, g] : grads)
    for (double x : g) sq += x * x;
  double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    double s = max_norm / norm;
    for (auto& [_, g] : grads)
      for (double& x : g) x *= s;
  }
  return norm;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double eps) {
  AUGCL_REQUIRE(eps > 0, "finite_diff_grad: eps must be positive");
  std::vector<double> out(x.numel());
  Tensor probe = x.clone(x.requires_grad());
  auto d = probe.mutable_data();
  for (std::size_t k = 0; k < d.size(); ++k) {
    double orig = d[k];
    d[k] = orig + eps;
    double up = f(probe);
    d[k] = orig - eps;
    double down = f(probe);
    d[k] = orig;
    out[k] = (up - down) / (2.0 * eps);
  }
  return Tensor(x.shape(), std::move(out));
}

}  // namespace augcl
