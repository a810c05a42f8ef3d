#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of (key, counter), so any value can be regenerated bit-identically
// without storing it. The generator is Threefry-2x64 with 20 rounds; normals
// come from a Box-Muller transform of one output block.

#include <array>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <vector>

#include "zovr/vec.hpp"

namespace zovr {

// Stream tags keep independent uses of the same seed apart. Direction
// generation and index sampling must never share a stream: regenerating
// directions may not disturb batch or (i, j) draws.
enum : std::uint64_t {
  kStreamDirections = 0xd1a1,
  kStreamSampling = 0x5a3b,
  kStreamOracle = 0x07ac,
  kStreamOutput = 0x0b0e,
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline constexpr std::uint64_t rotl64(std::uint64_t x, int r) {
  return (x << r) | (x >> (64 - r));
}

}  // namespace detail

// splitmix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += detail::kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Seed derivation: epoch seeds are mix(master_seed, s), stream splits are
// mix(seed, tag). mix64 is bijective, so distinct inputs stay distinct.
inline constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return mix64(a + detail::kGolden * (b + 1));
}

// Threefry-2x64, 20 rounds (Salmon et al., SC'11). Rotation constants are the
// published ones for the 2x64 variant.
inline std::array<std::uint64_t, 2> threefry2x64(std::array<std::uint64_t, 2> ctr,
                                                 std::array<std::uint64_t, 2> key) {
  constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::uint64_t ks[3] = {key[0], key[1], 0x1bd11bdaa9fc1a22ull ^ key[0] ^ key[1]};
  std::uint64_t x0 = ctr[0] + ks[0];
  std::uint64_t x1 = ctr[1] + ks[1];
  for (int block = 0; block < 5; ++block) {
    for (int r = 0; r < 4; ++r) {
      x0 += x1;
      x1 = detail::rotl64(x1, kRot[(block % 2) * 4 + r]);
      x1 ^= x0;
    }
    const int s = block + 1;
    x0 += ks[s % 3];
    x1 += ks[(s + 1) % 3] + static_cast<std::uint64_t>(s);
  }
  return {x0, x1};
}

// Maps a 64-bit word to (0, 1]; never returns 0, so log() in Box-Muller is
// safe. The top 2^11 words round to exactly 1.0, which Box-Muller maps to a
// zero normal; harmless, and cheaper than guarding a 2^-53 event.
inline double to_unit_open(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// One counter block -> two standard normals.
inline std::array<double, 2> normal_pair(std::array<std::uint64_t, 2> ctr,
                                         std::array<std::uint64_t, 2> key) {
  const auto w = threefry2x64(ctr, key);
  const double u1 = to_unit_open(w[0]);
  const double u2 = to_unit_open(w[1]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

// Sequential engine over one (seed, stream) keyed counter sequence.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{seed, stream}, ctr_{0, 0} {}

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ull; }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto w = threefry2x64(ctr_, key_);
    ++ctr_[1];
    spare_ = w[1];
    have_spare_ = true;
    return w[0];
  }

  // Uniform in [0, bound) by widening multiply with rejection; unbiased and
  // implementation-independent, unlike std::uniform_int_distribution.
  std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t t = (-bound) % bound;
      while (lo < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double unit_open() { return to_unit_open(next_u64()); }

  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    const double u1 = unit_open();
    const double u2 = unit_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(t);
    have_normal_ = true;
    return r * std::cos(t);
  }

  void fill_normal(Vec& out) {
    for (double& v : out) v = normal();
  }

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 2> ctr_;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

// Uniform size-B subset of {0, ..., n-1}, returned sorted ascending.
// Floyd's algorithm: O(B) memory independent of n.
std::vector<int> sample_without_replacement(int n, int B, CounterRng& rng);

}  // namespace zovr
