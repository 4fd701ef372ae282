// Counter-based random numbers.
//
// Philox4x64-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3")
// keyed by (seed, stream). Every derived quantity (uniforms, normals, signs,
// integers) is computed here rather than through <random> distributions, whose
// algorithms are implementation-defined, so a (seed, stream) pair produces the
// same numbers on every platform. The raw 64-bit output matches numpy's
// `Philox` bit generator for the same key and counter.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sparsecert {

class Philox4x64 {
 public:
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  // Applies the 10-round bijection to one counter block.
  static Block encrypt(Block counter, Key key);
};

// Stream of random variates. Copying an Rng forks the stream state.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via the Box-Muller transform; the second variate is cached.
  double normal();
  // +1 or -1 with equal probability (lowest bit of one draw).
  double sign();
  // Uniform integer in [0, bound) using Lemire's multiply-shift with rejection.
  std::uint64_t uniform_int(std::uint64_t bound);

 private:
  Philox4x64::Key key_;
  Philox4x64::Block counter_{};
  Philox4x64::Block buffer_{};
  int buffer_pos_ = 4;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Deterministic stream id for nested indices (e.g. trial t, restart r).
std::uint64_t mix_stream(std::uint64_t a, std::uint64_t b);

}  // namespace sparsecert
