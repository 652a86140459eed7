#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>

namespace spb {

// Counter-based pseudorandom generator. Every output word is a pure function
// of (seed, stream, counter), so draws can be indexed directly (graph
// sampling) or consumed sequentially (simulation paths) and reproduce
// bit-identically across platforms and worker counts.
//
// Algorithm id reported in run metadata: "splitmix64-counter/1".
// The word at counter k is the splitmix64 finalizer applied to
// key + k * 0x9e3779b97f4a7c15, with key derived from (seed, stream) by two
// finalizer rounds.
namespace rng {

inline constexpr std::string_view kAlgorithm = "splitmix64-counter/1";

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

constexpr std::uint64_t mix_bits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t key = mix_bits(seed + kGamma);
  return mix_bits(key ^ (stream * kGamma + 0x5851f42d4c957f2dull));
}

constexpr std::uint64_t word_at(std::uint64_t key, std::uint64_t counter) {
  return mix_bits(key + counter * kGamma);
}

// Uniform double in the open interval (0, 1); never returns 0 or 1 so that
// -log(u) is finite and strictly positive.
constexpr double unit_open(std::uint64_t word) {
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

// Stream tags keep unrelated draw purposes apart even under equal seeds.
inline constexpr std::uint64_t kGraphStream = 0x4752415048ull;        // edge sampling
inline constexpr std::uint64_t kTrialStreamBase = 0x5353410000000000ull;  // + trial index

}  // namespace rng

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(rng::derive_key(seed, stream)) {}

  std::uint64_t next_u64() { return rng::word_at(key_, counter_++); }

  double next_unit_open() { return rng::unit_open(next_u64()); }

  // Exponential waiting time with the given total rate.
  double next_exponential(double rate) { return -std::log(next_unit_open()) / rate; }

  // Index into `weights` proportionally to weight; cumulative walk with
  // strict inequality, last nonzero category absorbing the float residue.
  int next_categorical(std::span<const double> weights, double total) {
    const double target = next_unit_open() * total;
    double cum = 0.0;
    int last_nonzero = -1;
    for (int k = 0; k < static_cast<int>(weights.size()); ++k) {
      if (weights[k] <= 0.0) continue;
      last_nonzero = k;
      cum += weights[k];
      if (target < cum) return k;
    }
    return last_nonzero;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spb
