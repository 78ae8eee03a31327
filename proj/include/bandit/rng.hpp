#pragma once

#include <array>
#include <cstdint>

namespace bandit {

// Station for all randomness in the project. A stream is fully determined
// by (seed, stream_id): the same pair yields the same variate sequence on
// every run, independent of thread count or scheduling. Parallel units of
// work must each own their stream; streams are not shareable.
//
// Engine: xoshiro256++ with splitmix64 state expansion.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform01();

  // Uniform on {0, 1, ..., n-1}. Unbiased (rejection), n >= 1.
  std::uint32_t uniform_index(std::uint32_t n);

  // Standard normal deviate (Box-Muller; the spare is cached).
  double standard_normal();

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// splitmix64 finalizer; used to build stream ids from structured fields.
std::uint64_t mix64(std::uint64_t x);

}  // namespace bandit
