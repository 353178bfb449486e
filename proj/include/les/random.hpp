#pragma once

#include <cstdint>
#include <random>

#include "les/types.hpp"

namespace les {

/// Seedable generator with a fixed, documented variate pipeline so that
/// results reproduce across standard libraries:
///   - engine: std::mt19937_64 (its output sequence is fixed by the standard);
///   - uniform(): top 53 bits of one engine draw scaled by 2^-53, in [0, 1);
///   - normal(): Box-Muller on two uniforms, both variates of a pair are used
///     (cos branch first, then sin branch);
///   - below(n): rejection sampling on the raw 64-bit draw.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  std::uint64_t below(std::uint64_t n);

  /// rows x cols standard normals, filled column by column.
  Matrix normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 mix of (base, stream); used to give every sample in a
/// benchmark its own independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace les
