#include "augcl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "augcl/errors.hpp"

namespace augcl {

namespace {
double clamped_uniform(Rng& rng) { return std::clamp(rng.uniform(), kNoiseFloor, 1.0 - kNoiseFloor); }

int vector_axis(const Tensor& t) {
  if (t.rows() == 1) return 1;
  if (t.cols() == 1) return 0;
  throw InvalidShape("expected a row or column vector, got " + shape_str(t.shape()));
}
}  // namespace

namespace {
thread_local bool relaxed_forward = false;
}  // namespace

RelaxedForwardScope::RelaxedForwardScope() : previous_(relaxed_forward) { relaxed_forward = true; }
RelaxedForwardScope::~RelaxedForwardScope() { relaxed_forward = previous_; }
bool relaxed_forward_enabled() { return relaxed_forward; }

double sample_gumbel(Rng& rng) { return -std::log(-std::log(clamped_uniform(rng))); }

double sample_logistic(Rng& rng) {
  double u = clamped_uniform(rng);
  return std::log(u) - std::log1p(-u);
}

CategoricalSample gumbel_softmax(const Tensor& logits, double temperature, Rng& rng) {
  std::vector<double> noise(logits.numel());
  for (auto& g : noise) g = sample_gumbel(rng);
  return gumbel_softmax(logits, temperature, noise);
}

CategoricalSample gumbel_softmax(const Tensor& logits, double temperature, std::span<const double> noise) {
  AUGCL_REQUIRE(temperature > 0, "gumbel_softmax: temperature must be positive");
  AUGCL_REQUIRE(noise.size() == logits.numel(), "gumbel_softmax: noise size mismatch");
  int axis = vector_axis(logits);
  for (double x : logits.data()) AUGCL_REQUIRE(std::isfinite(x), "gumbel_softmax: non-finite logit");

  CategoricalSample s;
  s.temperature = temperature;
  Tensor g(logits.shape(), {noise.begin(), noise.end()});
  s.soft = softmax(mul_scalar(add(logits, g), 1.0 / temperature), axis);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.numel(); ++i) {
    double v = logits[i] + noise[i];
    if (v > best) {
      best = v;
      s.index = static_cast<int>(i);
    }
  }
  std::vector<double> onehot(logits.numel(), 0.0);
  onehot[s.index] = 1.0;
  s.straight_through =
      relaxed_forward_enabled() ? s.soft : straight_through(Tensor(logits.shape(), std::move(onehot)), s.soft);
  return s;
}

SubsetSample gumbel_top_k(std::span<const double> probs, int k, Rng& rng) {
  AUGCL_REQUIRE(k >= 1 && static_cast<std::size_t>(k) <= probs.size(), "gumbel_top_k: k out of range");
  double total = 0.0;
  for (double p : probs) {
    AUGCL_REQUIRE(p >= 0 && std::isfinite(p), "gumbel_top_k: probabilities must be finite and non-negative");
    total += p;
  }
  AUGCL_REQUIRE(total > 0, "gumbel_top_k: probabilities sum to zero");
  SubsetSample s;
  s.scores.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double g = sample_gumbel(rng);
    s.scores[i] = probs[i] > 0 ? std::log(probs[i]) + g : -std::numeric_limits<double>::infinity();
  }
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s.scores[a] > s.scores[b]; });
  s.indices.assign(order.begin(), order.begin() + k);
  return s;
}

BernoulliSample relaxed_bernoulli(const Tensor& logits, double temperature, Rng& rng) {
  std::vector<double> noise(logits.numel());
  for (auto& l : noise) l = sample_logistic(rng);
  return relaxed_bernoulli(logits, temperature, noise);
}

BernoulliSample relaxed_bernoulli(const Tensor& logits, double temperature, std::span<const double> noise) {
  AUGCL_REQUIRE(temperature > 0, "relaxed_bernoulli: temperature must be positive");
  AUGCL_REQUIRE(noise.size() == logits.numel(), "relaxed_bernoulli: noise size mismatch");
  BernoulliSample s;
  s.temperature = temperature;
  Tensor l(logits.shape(), {noise.begin(), noise.end()});
  s.soft = sigmoid(mul_scalar(add(logits, l), 1.0 / temperature));
  s.hard.resize(logits.numel());
  std::vector<double> hard(logits.numel());
  for (std::size_t i = 0; i < hard.size(); ++i) {
    s.hard[i] = logits[i] + noise[i] > 0 ? 1 : 0;
    hard[i] = s.hard[i];
  }
  s.straight_through =
      relaxed_forward_enabled() ? s.soft : straight_through(Tensor(logits.shape(), std::move(hard)), s.soft);
  return s;
}

}  // namespace augcl
