#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace augcl {

/// Counter-based splittable PRNG.
///
/// Every draw is a pure function of (key, counter), so a stream is fully
/// described by those two words and can be checkpointed. `split` derives an
/// independent child stream from a name without advancing the parent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);
  static Rng from_state(std::uint64_t key, std::uint64_t counter);

  Rng split(std::string_view name) const;
  Rng split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform in [lo, hi].
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Rng(std::uint64_t key, std::uint64_t counter, int) : key_(key), counter_(counter) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace augcl
