#pragma once

#include <cstdint>

namespace subvec {

// splitmix64 output function. Full 64-bit avalanche, so distinct inputs give
// statistically independent outputs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ b);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix64(mix64(a, b) ^ c);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) {
  return mix64(mix64(a, b, c) ^ d);
}

// Top 53 bits -> [0, 1).
inline double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Sequential splitmix64 stream. Fully specified, so seeded runs are
// bit-identical across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double next_unit() { return to_unit(next()); }

 private:
  std::uint64_t state_;
};

// Domain-separation tags for the keyed streams derived from one run seed.
namespace rng_stream {
inline constexpr std::uint64_t kSubsample = 0x5355425341ULL;
inline constexpr std::uint64_t kNegatives = 0x4e45474154ULL;
inline constexpr std::uint64_t kInitWord = 0x494e495455ULL;
inline constexpr std::uint64_t kInitContext = 0x494e495456ULL;
inline constexpr std::uint64_t kInitSubword = 0x494e495451ULL;
}  // namespace rng_stream

}  // namespace subvec
