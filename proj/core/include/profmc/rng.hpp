#pragma once

#include <cstdint>

namespace profmc {

/*
 * Deterministic randomness for the simulator.
 *
 * Stream: splitmix64 (Steele/Lea/Flood weyl-sequence + Vigna finalizer),
 * 64-bit state, period 2^64. Uniforms take the top 53 bits plus a half-ulp
 * offset, so they lie strictly inside (0,1). Gaussians apply the AS241
 * (PPND16) inverse normal CDF to one uniform each: a pure function of the
 * bit stream, which is what makes replicate output byte-reproducible across
 * worker counts and repeated runs.
 *
 * Seeds for replicate r of a sweep cell (n, p) derive from the master seed by
 * nested finalizer mixing, so distinct cells and replicates get decorrelated
 * streams without coordination.
 */

// splitmix64 finalizer applied after the golden-ratio increment.
std::uint64_t mix64(std::uint64_t z);

std::uint64_t replicate_seed(std::uint64_t master_seed, std::uint64_t n,
                             std::uint64_t p_total, std::uint64_t replicate_index);

// Inverse of the standard normal CDF (Wichura's PPND16), |error| ~ 1e-15
// for p in (0,1). Out-of-range p throws.
double inverse_normal_cdf(double p);

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_unit();      // strictly inside (0,1)
  double next_gaussian();  // N(0,1) via inverse-CDF

 private:
  std::uint64_t state_;
};

}  // namespace profmc
