#include "tablesage/random.hpp"

#include <limits>
#include <numeric>

#include "tablesage/errors.hpp"

namespace tablesage {

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) {
    throw ArgumentError("uniform_index: empty range");
  }
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t remainder = (kMax % bound + 1) % bound;
  while (true) {
    std::uint64_t x = next();
    if (x <= kMax - remainder) {
      return static_cast<std::size_t>(x % bound);
    }
  }
}

double Rng::uniform_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t fnv1a64(std::string_view data, std::uint64_t hash) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = fnv1a64(tag);
  // splitmix64 finalizer over the combination
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
  if (k > n) {
    throw SamplingError("cannot draw " + std::to_string(k) + " items from " + std::to_string(n));
  }
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + rng.uniform_index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace tablesage
