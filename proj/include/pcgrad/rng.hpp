#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace pcgrad::rng {

// SplitMix64 finalizer: a bijective hash of a 64-bit word. Used both as the
// generator's output stage and to fold run/iteration/task indices into
// derived sub-seeds, so every shuffle is a pure function of those indices.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t combine(std::uint64_t seed, std::uint64_t word) {
  // boost-style hash_combine on top of the splitmix finalizer
  return seed ^ (mix64(word) + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
}

inline constexpr std::uint64_t derive(std::uint64_t seed,
                                      std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = mix64(seed);
  for (auto w : words) h = combine(h, w);
  return mix64(h);
}

// Counter-based generator: state advances by a fixed gamma, output is the
// mix of the counter. Deterministic across platforms/compilers, unlike the
// std:: distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 bits of mantissa
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // log-uniform over [lo, hi], lo > 0
  double loguniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Box-Muller (the spare is dropped to keep the draw sequence simple)
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // index in [0, bound); modulo bias is ~bound/2^64, irrelevant at our sizes
  std::size_t index(std::size_t bound) {
    return static_cast<std::size_t>(next() % static_cast<std::uint64_t>(bound));
  }

  std::uint64_t next_int() { return next(); }

 private:
  std::uint64_t state_;
};

// Fisher-Yates
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& r) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = r.index(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace pcgrad::rng
