#pragma once

#include <array>
#include <cstdint>

#include "stablepc/dense.hpp"

namespace stablepc {

/// xoshiro256** seeded through splitmix64. Output is identical on every
/// platform for a given seed, unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Box-Muller transform.
  double gaussian();

 private:
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derive an independent stream seed from (seed, stream) with splitmix64.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Entries filled in column-major order from Rng(seed).
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
Vector gaussian_vector(std::size_t n, std::uint64_t seed);
/// Gaussian vector scaled to unit 2-norm.
Vector unit_gaussian_vector(std::size_t n, std::uint64_t seed);

}  // namespace stablepc
