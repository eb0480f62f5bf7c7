#pragma once

#include <cstdint>
#include <string_view>

namespace plasmode {

// 64-bit finalizer from splitmix64; full avalanche, used both for seeding and
// for deriving substream keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a over the purpose tag so that substream families ("source",
// "replicate-st", ...) occupy unrelated regions of the seed space.
constexpr std::uint64_t purpose_hash(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Deterministic substream generator: the state is a pure function of
// (master_seed, purpose, index), so any replicate can be regenerated in
// isolation and results do not depend on scheduling or worker count.
//
// Core generator is xoshiro256++ seeded through splitmix64 (the seeding
// recommended by its authors). All variate transforms are hand-rolled rather
// than taken from <random> because libstdc++/libc++ distributions are
// implementation-defined and would silently break bitwise reproducibility.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view purpose, std::uint64_t index);

  std::uint64_t next_u64();

  // Uniform on [0,1), 53 random bits.
  double next_double();

  // Standard normal via Box-Muller; the sine partner is discarded so each
  // draw consumes exactly two uniforms and streams carry no transform state.
  double next_normal();
  double next_normal(double mean, double sd) { return mean + sd * next_normal(); }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Uniform on {0,...,n-1} by bitmask rejection (unbiased).
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

}  // namespace plasmode
