// Counter-based random numbers: every (seed, slot, stream) triple maps to an
// independent 64-bit value, so two system variants can replay the exact same
// per-slot randomness without sharing generator state.

#ifndef BCSTAB_COUNTER_RNG_H_
#define BCSTAB_COUNTER_RNG_H_

#include <cstdint>

namespace bcstab {

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class DrawStream : std::uint64_t {
  kArrival1 = 0,
  kArrival2 = 1,
  kDecode1 = 2,
  kDecode2 = 3,
};

class CounterRng {
 public:
  static constexpr std::uint64_t kStreams = 4;

  explicit constexpr CounterRng(std::uint64_t seed)
      : key_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

  constexpr std::uint64_t bits(std::uint64_t slot, DrawStream stream) const {
    const std::uint64_t counter = slot * kStreams + static_cast<std::uint64_t>(stream);
    return mix64(key_ ^ mix64(counter + 0x632be59bd9b4e019ULL));
  }

  // Uniform in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t slot, DrawStream stream) const {
    return static_cast<double>(bits(slot, stream) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_;
};

// Independent child seed, used to give each probe of a search its own stream.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

}  // namespace bcstab

#endif  // BCSTAB_COUNTER_RNG_H_
