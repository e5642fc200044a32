#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "augcl/rng.hpp"
#include "augcl/tensor.hpp"

namespace augcl {

// Uniforms are clamped to [kNoiseFloor, 1 - kNoiseFloor] before the Gumbel or
// logistic transform, so all noise is finite.
inline constexpr double kNoiseFloor = 1e-10;

/// While an instance is alive on this thread, straight-through samples forward
/// their relaxed value instead of the hard one; discrete choices are unchanged.
/// Finite-difference checks use it because the hard value has zero derivative.
class RelaxedForwardScope {
 public:
  RelaxedForwardScope();
  ~RelaxedForwardScope();
  RelaxedForwardScope(const RelaxedForwardScope&) = delete;
  RelaxedForwardScope& operator=(const RelaxedForwardScope&) = delete;

 private:
  bool previous_;
};
bool relaxed_forward_enabled();

double sample_gumbel(Rng& rng);
double sample_logistic(Rng& rng);

/// Categorical relaxation of a logit vector (1xn or nx1).
struct CategoricalSample {
  Tensor soft;              // softmax((logits + g) / t)
  Tensor straight_through;  // one-hot forward value, gradient of `soft`
  int index = -1;           // argmax of the perturbed logits
  double temperature = 1.0;
};

CategoricalSample gumbel_softmax(const Tensor& logits, double temperature, Rng& rng);
/// Same computation with caller-supplied noise (one value per logit).
CategoricalSample gumbel_softmax(const Tensor& logits, double temperature, std::span<const double> noise);

struct SubsetSample {
  std::vector<int> indices;    // selection order (largest perturbed score first)
  std::vector<double> scores;  // log(p_i) + g_i for every item; -inf where p_i = 0
};

/// Draws k items without replacement with probabilities proportional to `probs`.
SubsetSample gumbel_top_k(std::span<const double> probs, int k, Rng& rng);

/// Elementwise relaxed Bernoulli over a tensor of logits.
struct BernoulliSample {
  Tensor soft;              // sigmoid((logits + logistic noise) / t)
  Tensor straight_through;  // 0/1 forward value, gradient of `soft`
  std::vector<std::uint8_t> hard;
  double temperature = 1.0;
};

BernoulliSample relaxed_bernoulli(const Tensor& logits, double temperature, Rng& rng);
BernoulliSample relaxed_bernoulli(const Tensor& logits, double temperature, std::span<const double> noise);

}  // namespace augcl
