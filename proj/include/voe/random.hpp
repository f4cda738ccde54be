#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace voe {

/// Portable seeded generator. The distributions below are implemented here
/// rather than taken from <random> so that fixtures regenerate bit-identically
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);
  double normal();
  /// Index drawn from an unnormalized non-negative weight vector.
  std::size_t categorical(std::span<const double> weights);
  /// A Dirichlet(1, ..., 1) draw of the given dimension.
  std::vector<double> flat_dirichlet(std::size_t dim);

 private:
  std::uint64_t s_[4];
};

/// Derives an independent stream seed from a master seed and a stream index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

}  // namespace voe
