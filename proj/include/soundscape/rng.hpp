#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace soundscape {

/// SplitMix64 (Steele, Lea, Flood). Used to expand seeds.
///   SplitMix64(1234567) -> 6457827717110365317, 3203168211198807973, ...
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman, Vigna).
///   state {1, 2, 3, 4} -> 11520, 0, 1509978240, 1215971899390074240, ...
class Xoshiro256StarStar {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256StarStar(std::array<std::uint64_t, 4> state) : s_(state) {}

  /// State = four consecutive SplitMix64 outputs from `seed`.
  static constexpr Xoshiro256StarStar from_seed(std::uint64_t seed) {
    SplitMix64 sm(seed);
    return Xoshiro256StarStar({sm.next(), sm.next(), sm.next(), sm.next()});
  }

  /// Generator for permutation replicate `b` under `seed`: its state is
  /// SplitMix64(seed) outputs 4b .. 4b+3, so replicates draw disjoint slices of
  /// one SplitMix64 stream and can be built in any order.
  static constexpr Xoshiro256StarStar for_replicate(std::uint64_t seed, std::uint64_t b) {
    return from_seed(seed + 4 * b * 0x9E3779B97F4A7C15ULL);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  constexpr result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
  std::uint64_t below(std::uint64_t bound) {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<u128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_;
};

/// Fisher-Yates from the back: for i = n-1 .. 1 swap(i, below(i + 1)).
template <typename T>
void shuffle(std::span<T> items, Xoshiro256StarStar& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace soundscape
