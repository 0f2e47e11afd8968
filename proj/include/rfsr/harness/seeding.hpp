#pragma once

#include <cstdint>

namespace rfsr::harness {

/// Grid position of one trial. Each index must be below 2^16.
struct TrialIndex {
  std::uint32_t n = 0;
  std::uint32_t M = 0;
  std::uint32_t T = 0;
  std::uint32_t rep = 0;
};

/// Bijective 64-bit finalizer (splitmix64).
std::uint64_t mix64(std::uint64_t x);

/// base_seed XOR mix64(pack(n, M, T, rep)), where pack places each index in
/// its own 16-bit lane. Distinct indices give distinct seeds for a fixed base.
std::uint64_t trial_seed(std::uint64_t base_seed, const TrialIndex& index);

/// Independent sub-streams of one trial seed (features vs data).
enum class Stream : std::uint64_t { Features = 1, Data = 2, Noise = 3 };
std::uint64_t stream_seed(std::uint64_t trial, Stream stream);

}  // namespace rfsr::harness
