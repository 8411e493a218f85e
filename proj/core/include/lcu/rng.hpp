#pragma once

#include <cstdint>
#include <string_view>

namespace lcu {

// Counter-based substream RNG. Streams are derived from a 64-bit master seed
// and a (purpose tag, index, replicate) triple by splitmix64 chaining, so any
// sampler call site gets the same stream regardless of execution order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent substream for (tag, j, b). Deterministic in its arguments.
  Rng substream(std::string_view tag, std::uint64_t j = 0,
                std::uint64_t b = 0) const;

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of precision.
  double uniform();
  // Standard normal via Box-Muller (no reliance on libstdc++ distributions,
  // so streams are stable across standard libraries).
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;

  void init_state();
};

// splitmix64 step, exposed for hashing/digest use.
std::uint64_t mix64(std::uint64_t x);

}  // namespace lcu
