#include "rfsr/harness/seeding.hpp"

#include "rfsr/errors.hpp"

namespace rfsr::harness {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base_seed, const TrialIndex& index) {
  constexpr std::uint32_t lane = 1u << 16;
  if (index.n >= lane || index.M >= lane || index.T >= lane || index.rep >= lane)
    throw InvalidArgument("trial_seed: grid index exceeds 65535");
  const std::uint64_t packed = (static_cast<std::uint64_t>(index.n) << 48) |
                               (static_cast<std::uint64_t>(index.M) << 32) |
                               (static_cast<std::uint64_t>(index.T) << 16) |
                               static_cast<std::uint64_t>(index.rep);
  return base_seed ^ mix64(packed);
}

std::uint64_t stream_seed(std::uint64_t trial, Stream stream) {
  return mix64(trial ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
}

}  // namespace rfsr::harness
