#include <doctest.h>

#include <cmath>
#include <random>

#include "attralign/core.hpp"
#include "attralign/error.hpp"

using namespace attralign;

namespace {

EmbeddingVector ev(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an attralign::Error");
  return ErrorKind::Usage;
}

}  // namespace

TEST_CASE("categories") {
  CHECK(kAllCategories.size() == 5);
  for (AttributeCategory c : kAllCategories) {
    CHECK(parse_category(category_key(c)) == c);
    CHECK(parse_category(category_name(c)) == c);
  }
  CHECK(category_name(AttributeCategory::UpperBody) == "UpperBody");
  CHECK_FALSE(parse_category("global").has_value());
  CHECK(parse_modality("visual") == Modality::Visual);
  CHECK_FALSE(parse_modality("audio").has_value());
}

TEST_CASE("embedding vectors reject empty and non-finite input") {
  CHECK(kind_of([] { ev({}); }) == ErrorKind::DimensionMismatch);
  CHECK_THROWS_AS(ev({1.0, NAN}), Error);
  CHECK_THROWS_AS(ev({INFINITY}), Error);
}

TEST_CASE("cosine") {
  CHECK(cosine(ev({1, 0, 0}), ev({1, 0, 0})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(ev({1, 0}), ev({0, 1})) == 0.0);
  CHECK(std::abs(cosine(ev({1, 1}), ev({1, 0})) - 0.707106781186547524) < 1e-9);

  CHECK(kind_of([] { cosine(ev({1, 0}), ev({1, 0, 0})); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { cosine(ev({0, 0}), ev({1, 0})); }) == ErrorKind::ZeroNormVector);
  CHECK(cosine(ev({0, 0}), ev({1, 0}), ZeroNormPolicy::Lenient) == 0.0);
}

TEST_CASE("cosine is scale invariant and self-similar") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> s(0.01, 100.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(7), b(7);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    const double la = s(rng), mb = s(rng);
    std::vector<double> a2 = a, b2 = b;
    for (auto& x : a2) x *= la;
    for (auto& x : b2) x *= mb;
    CHECK(std::abs(cosine(a, b) - cosine(a2, b2)) < 1e-9);
    CHECK(std::abs(cosine(a, a) - 1.0) < 1e-9);
    const double c = cosine(a, b);
    CHECK((c >= -1.0 && c <= 1.0));
  }
}

TEST_CASE("l2_normalize") {
  const auto a = l2_normalize(ev({3, 4}));
  CHECK(a[0] == doctest::Approx(0.6));
  CHECK(a[1] == doctest::Approx(0.8));
  CHECK(a.is_normalized());
  const auto b = l2_normalize(ev({1, 0, 0}));
  CHECK(b == ev({1, 0, 0}));
  const auto c = l2_normalize(ev({2, 2}));
  CHECK(std::abs(c[0] - 0.70710678) < 1e-8);
  CHECK(std::abs(c[1] - 0.70710678) < 1e-8);
  CHECK_FALSE(ev({2, 2}).is_normalized());
  CHECK(kind_of([] { l2_normalize(ev({0, 0})); }) == ErrorKind::ZeroNormVector);
}

TEST_CASE("top_k") {
  const std::vector<EmbeddingVector> p1{ev({1, 0}), ev({0, 1})};
  CHECK(top_k(ev({1, 0}), p1, 1) == std::vector<std::size_t>{0});
  const std::vector<EmbeddingVector> p2{ev({1, 0}), ev({1, 0})};
  CHECK(top_k(ev({1, 0}), p2, 1) == std::vector<std::size_t>{0});
  const std::vector<EmbeddingVector> p3{ev({1, 0}), ev({0, 1}), ev({-1, 0})};
  CHECK(top_k(ev({1, 1}), p3, 2) == std::vector<std::size_t>{0, 1});

  CHECK(kind_of([] { top_k(ev({1, 0}), std::vector<EmbeddingVector>{}, 1); }) ==
        ErrorKind::EmptyPool);
  CHECK(kind_of([&] { top_k(ev({1, 0}), p1, 0); }) == ErrorKind::InvalidParams);
  CHECK(top_k(ev({1, 0}), p1, 10).size() == 2);
}

TEST_CASE("top_k prefix property and rescaling invariance") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> coarse(-2, 2);
  for (int t = 0; t < 100; ++t) {
    std::vector<EmbeddingVector> pool, scaled;
    for (int i = 0; i < 12; ++i) {
      // Coarse integer vectors make ties common.
      std::vector<double> v{double(coarse(rng)), double(coarse(rng)), 1.0};
      pool.push_back(ev(v));
      for (auto& x : v) x *= 3.5;
      scaled.push_back(ev(v));
    }
    const auto q = ev({n(rng), n(rng), n(rng)});
    const auto full = top_k(q, pool, pool.size());
    CHECK(full.size() == pool.size());
    for (std::size_t k = 1; k < pool.size(); ++k) {
      const auto part = top_k(q, pool, k);
      CHECK(std::equal(part.begin(), part.end(), full.begin()));
    }
    CHECK(top_k(q, scaled, 5) == top_k(q, pool, 5));
  }
}

TEST_CASE("embedding records") {
  AttributeSlots slots;
  slots[index_of(AttributeCategory::UpperBody)] = ev({1, 2});
  const EmbeddingRecord r(3, Modality::Visual, ev({0, 1}), slots);
  CHECK(r.present(AttributeCategory::UpperBody));
  CHECK_FALSE(r.present(AttributeCategory::Head));
  CHECK(r.dim() == 2);
  CHECK_THROWS_AS(r.attr(AttributeCategory::Head), Error);

  slots[index_of(AttributeCategory::Bags)] = ev({1, 2, 3});
  CHECK(kind_of([&] { EmbeddingRecord(3, Modality::Visual, ev({0, 1}), slots); }) ==
        ErrorKind::DimensionMismatch);
}

TEST_CASE("alignment params") {
  const auto d = AlignmentParams::defaults();
  CHECK(d.alpha() == 0.6);
  CHECK(d.beta() == 0.4);
  CHECK(d.margin() == 0.2);
  CHECK(d.tau_p() == 10.0);
  CHECK(d.tau_n() == 40.0);
  CHECK_NOTHROW(AlignmentParams(0.6, 0.4, 0.2, 10, 40));
  CHECK(kind_of([] { AlignmentParams(0.6, 0.5, 0.2, 10, 40); }) == ErrorKind::InvalidParams);
  CHECK_THROWS_AS(AlignmentParams::from_margin(0.6, 0.7, 10, 40), Error);
  CHECK_THROWS_AS(AlignmentParams::from_margin(0.6, 0.0, 10, 40), Error);
  CHECK_THROWS_AS(AlignmentParams::from_margin(1.2, 0.2, 10, 40), Error);
  CHECK_THROWS_AS(AlignmentParams::from_margin(0.6, 0.2, 0, 40), Error);
  CHECK_THROWS_AS(AlignmentParams::from_margin(0.6, 0.2, 10, -1), Error);
}
