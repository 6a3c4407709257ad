#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tablesage {

// Seeded generator whose output is identical on every platform: the
// mt19937_64 sequence is fixed by the standard, and the bounded draws below
// do not go through the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n) by rejection; n must be positive.
  std::size_t uniform_index(std::size_t n);
  // Uniform in [0, 1) with 53 bits.
  double uniform_unit();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL);

// Derives an independent seed from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag);

// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k);

}  // namespace tablesage
