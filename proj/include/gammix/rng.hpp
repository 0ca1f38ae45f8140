#pragma once

#include <array>
#include <cstdint>

namespace gammix {

// xoshiro256++ seeded through splitmix64.  Chosen over std::mt19937_64
// because the whole pipeline (engine plus the variate transforms below) is
// specified bit-exactly here, so files produced from a seed are reproducible
// across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by (seed, generation, index).  Used by the
  // hierarchy simulator so every node draws from its own deterministic
  // stream regardless of traversal order.
  static Rng stream(std::uint64_t seed, std::uint64_t generation,
                    std::uint64_t index);

  std::uint64_t next_u64();

  // Uniform on [0,1) with 53 random bits.
  double uniform01();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Standard normal via the Marsaglia polar method (no libm trig involved).
  double normal();
  // Gamma(alpha, rate 1) via Marsaglia-Tsang for alpha >= 1 and the
  // power-of-uniform boost for alpha < 1.
  double gamma(double alpha);

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

// splitmix64 finalizer; also used to derive stream keys.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace gammix
