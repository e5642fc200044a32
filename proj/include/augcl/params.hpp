#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "augcl/tensor.hpp"

namespace augcl {

/// Uniform Xavier/Glorot init in [-b, b], b = sqrt(6 / (fan_in + fan_out)).
/// For rank >= 2, fan_in = shape[0] and fan_out = shape[1] (times any trailing
/// receptive dims); a rank-1 shape uses its length for both.
Tensor xavier_init(const Shape& shape, std::uint64_t seed);

/// Named, ordered collection of trainable tensors.
class ParameterSet {
 public:
  /// Registers a parameter; throws on a duplicate name.
  Tensor& add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  /// Replaces the tensor under an existing name (shape must match).
  void replace(const std::string& name, Tensor value);

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  void zero_grad();

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

 private:
  std::map<std::string, Tensor> params_;
};

using GradMap = std::map<std::string, std::vector<double>>;

/// Zeroes the gradients of `params`, back-propagates `loss` and collects one
/// gradient per parameter (all zeros for parameters the loss does not reach).
GradMap backward(const Tensor& loss, ParameterSet& params);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
  std::map<std::string, std::uint64_t> param_steps;
};

/// One Adam update for the parameters present in `grads`. Parameters that are
/// absent keep their value and moments.
void adam_step(ParameterSet& params, const GradMap& grads, AdamState& state, double lr);

/// Scales `grads` in place so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_grad_norm(GradMap& grads, double max_norm);

/// Central finite differences of a scalar function, coordinate by coordinate.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double eps);

}  // namespace augcl
