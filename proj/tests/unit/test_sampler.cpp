#include <doctest.h>

#include <random>

#include "attralign/error.hpp"
#include "attralign/sampler.hpp"

using namespace attralign;

namespace {

IndexedEmbedding item(std::size_t i, std::vector<double> v) { return {i, EmbeddingVector(std::move(v))}; }

SamplerInput random_input(std::mt19937_64& rng, std::size_t nv, std::size_t nt, std::size_t d,
                          std::size_t k) {
  std::normal_distribution<double> n(0.0, 1.0);
  SamplerInput in;
  in.k = k;
  for (std::size_t i = 0; i < nv; ++i) {
    std::vector<double> v(d);
    for (auto& x : v) x = n(rng);
    in.visual.push_back(item(i * 3 + 1, v));  // sparse, non-contiguous indices
  }
  for (std::size_t j = 0; j < nt; ++j) {
    std::vector<double> v(d);
    for (auto& x : v) x = n(rng);
    in.textual.push_back(item(j * 2, v));
  }
  return in;
}

}  // namespace

TEST_CASE("k-reciprocal examples") {
  SamplerInput a;
  a.k = 1;
  a.visual = {item(0, {1, 0}), item(1, {0, 1})};
  a.textual = a.visual;
  const SurrogatePositiveSet expect_a{{0, {0}}, {1, {1}}};
  CHECK(k_reciprocal_sample(a) == expect_a);
  CHECK(k_reciprocal_oracle(a) == expect_a);

  SamplerInput b;
  b.k = 1;
  b.visual = {item(0, {1, 0})};
  b.textual = {item(0, {0, 1})};
  const SurrogatePositiveSet expect_b{{0, {0}}};
  CHECK(k_reciprocal_sample(b) == expect_b);
  CHECK(k_reciprocal_oracle(b) == expect_b);

  SamplerInput c;
  c.k = 1;
  c.visual = {item(0, {1, 0}), item(1, {0.9, 0.1})};
  c.textual = {item(0, {1, 0})};
  const SurrogatePositiveSet expect_c{{0, {0}}, {1, {}}};
  CHECK(k_reciprocal_sample(c) == expect_c);
  CHECK(k_reciprocal_oracle(c) == expect_c);
}

TEST_CASE("large k makes every pair reciprocal") {
  std::mt19937_64 rng(3);
  const auto in0 = random_input(rng, 6, 9, 4, 9);
  for (const auto& [v, ts] : k_reciprocal_sample(in0)) CHECK(ts.size() == 9);
  for (const auto& [v, ts] : k_reciprocal_oracle(in0)) CHECK(ts.size() == 9);
}

TEST_CASE("sampler matches oracle, recomputed reciprocity holds") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> size(2, 64);
  const std::size_t dims[] = {2, 8, 16};
  const std::size_t ks[] = {1, 4, 8};
  for (int t = 0; t < 60; ++t) {
    const auto in = random_input(rng, size(rng), size(rng), dims[t % 3], ks[(t / 3) % 3]);
    const auto fast = k_reciprocal_sample(in);
    CHECK(fast == k_reciprocal_oracle(in));
    CHECK(fast.size() == in.visual.size());
  }
  const auto in = random_input(rng, 16, 16, 4, 3);
  CHECK(k_reciprocal_sample(in) == k_reciprocal_oracle(in));
}

TEST_CASE("k-monotonicity and scale invariance") {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 20; ++t) {
    auto in = random_input(rng, 20, 25, 8, 1);
    for (std::size_t k = 1; k < 12; ++k) {
      in.k = k;
      const auto small = k_reciprocal_sample(in);
      in.k = k + 1;
      const auto big = k_reciprocal_sample(in);
      for (const auto& [v, ts] : small) {
        for (std::size_t tt : ts) CHECK(big.at(v).contains(tt));
      }
    }
    in.k = 4;
    const auto before = k_reciprocal_sample(in);
    SamplerInput scaled = in;
    for (auto& e : scaled.visual) {
      std::vector<double> v(e.vector.values().begin(), e.vector.values().end());
      for (auto& x : v) x *= 7.25;
      e.vector = EmbeddingVector(v);
    }
    CHECK(k_reciprocal_sample(scaled) == before);
  }
}

TEST_CASE("duplicated pools with k = 1 pair every item with itself") {
  std::mt19937_64 rng(29);
  auto in = random_input(rng, 30, 1, 8, 1);
  in.textual = in.visual;
  for (const auto& [v, ts] : k_reciprocal_sample(in)) CHECK(ts == std::set<std::size_t>{v});
}

TEST_CASE("sampler errors") {
  SamplerInput empty;
  empty.textual = {item(0, {1, 0})};
  CHECK_THROWS_AS(k_reciprocal_sample(empty), Error);
  CHECK_THROWS_AS(k_reciprocal_oracle(empty), Error);
  SamplerInput zero_k;
  zero_k.k = 0;
  zero_k.visual = zero_k.textual = {item(0, {1, 0})};
  CHECK_THROWS_AS(k_reciprocal_sample(zero_k), Error);
  SamplerInput dup;
  dup.visual = {item(0, {1, 0}), item(0, {0, 1})};
  dup.textual = {item(0, {1, 0})};
  CHECK_THROWS_AS(k_reciprocal_sample(dup), Error);
}

TEST_CASE("build_positive_pairs") {
  const std::vector<LabeledIndex> v{{0, 1}, {1, 2}};
  const std::vector<LabeledIndex> t{{0, 1}, {1, 2}};
  CHECK(build_positive_pairs(v, t, {}) ==
        std::vector<PositivePair>{{0, 0, PairProvenance::SameIdentity},
                                  {1, 1, PairProvenance::SameIdentity}});
  CHECK(build_positive_pairs(v, t, {{0, {1}}}) ==
        std::vector<PositivePair>{{0, 0, PairProvenance::SameIdentity},
                                  {0, 1, PairProvenance::Surrogate},
                                  {1, 1, PairProvenance::SameIdentity}});
  CHECK(build_positive_pairs(v, t, {{0, {0}}}) ==
        std::vector<PositivePair>{{0, 0, PairProvenance::SameIdentity},
                                  {1, 1, PairProvenance::SameIdentity}});
}
