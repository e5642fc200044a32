#include "augcl/rng.hpp"

#include "augcl/errors.hpp"

namespace augcl {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t hash_name(std::string_view name) {
  // FNV-1a, then mixed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return mix64(h);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x5DEECE66DULL)), counter_(0) {}

Rng Rng::from_state(std::uint64_t key, std::uint64_t counter) { return Rng(key, counter, 0); }

Rng Rng::split(std::string_view name) const { return Rng(mix64(key_ ^ hash_name(name)), 0, 0); }

Rng Rng::split(std::uint64_t index) const {
  return Rng(mix64(key_ + mix64(index ^ 0xA0761D6478BD642FULL)), 0, 0);
}

std::uint64_t Rng::next_u64() {
  std::uint64_t c = counter_++;
  return mix64(mix64(key_ ^ (c * 0xD1B54A32D192ED03ULL)) + c);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  AUGCL_REQUIRE(n > 0, "uniform_int: n must be positive");
  // Lemire's nearly-divisionless method.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace augcl
