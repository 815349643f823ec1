#pragma once

#include <cstdint>
#include <initializer_list>

namespace ncslice {

// SplitMix64 (Steele, Lea, Flood 2014). Used wherever an output must be a
// pure function of a seed tuple: coefficient vectors, per-iteration and
// per-link sub-seeds.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

 private:
  std::uint64_t state_;
};

// Folds a tuple of words into one seed. Order matters.
constexpr std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t acc = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t w : words) {
    SplitMix64 g(acc ^ w);
    acc = g();
  }
  return acc;
}

// Uniform double in [0, 1) with 53 random bits.
template <class Engine>
double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace ncslice
