#include <gtest/gtest.h>

#include <set>

#include "tablesage/errors.hpp"
#include "tablesage/random.hpp"

namespace tablesage {
namespace {

TEST(Random, EngineMatchesStandardSequence) {
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) {
    x = rng.next();
  }
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Random, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Random, MixSeedSeparatesTags) {
  EXPECT_EQ(mix_seed(1, "tree/0"), mix_seed(1, "tree/0"));
  EXPECT_NE(mix_seed(1, "tree/0"), mix_seed(1, "tree/1"));
  EXPECT_NE(mix_seed(1, "tree/0"), mix_seed(2, "tree/0"));
}

TEST(Random, UniformIndexStaysInRange) {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    std::size_t v = rng.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) {
    EXPECT_GT(c, 800);
  }
  EXPECT_THROW(rng.uniform_index(0), ArgumentError);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform_unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Random, SampleIndicesDistinctAndReproducible) {
  Rng a(11);
  Rng b(11);
  auto first = sample_indices(a, 20, 8);
  EXPECT_EQ(first, sample_indices(b, 20, 8));
  EXPECT_EQ(std::set<std::size_t>(first.begin(), first.end()).size(), 8u);
  for (auto i : first) {
    EXPECT_LT(i, 20u);
  }
  Rng c(11);
  EXPECT_TRUE(sample_indices(c, 5, 0).empty());
  EXPECT_THROW(sample_indices(c, 5, 6), SamplingError);
}

}  // namespace
}  // namespace tablesage
