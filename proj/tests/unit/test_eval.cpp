#include <doctest.h>

#include <algorithm>
#include <random>

#include "attralign/commands.hpp"
#include "attralign/error.hpp"
#include "attralign/eval.hpp"
#include "attralign/trainer.hpp"

using namespace attralign;

namespace {

EmbeddingVector ev(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

EmbeddingRecord rec(int id, Modality m, std::vector<double> g,
                    std::vector<std::pair<AttributeCategory, std::vector<double>>> attrs = {}) {
  AttributeSlots slots;
  for (auto& [c, v] : attrs) slots[index_of(c)] = ev(v);
  return EmbeddingRecord(id, m, ev(std::move(g)), std::move(slots));
}

RankingResult ranking(std::size_t q, std::vector<std::size_t> order) {
  RankingResult r;
  r.query = q;
  r.indices = std::move(order);
  for (std::size_t i = 0; i < r.indices.size(); ++i) r.scores.push_back(-static_cast<double>(i));
  return r;
}

}  // namespace

TEST_CASE("combined_score") {
  using C = AttributeCategory;
  const auto a = rec(1, Modality::Textual, {1, 2}, {{C::Head, {1, 0}}, {C::Bags, {0, 3}}});
  CHECK(combined_score(a, a, 1.0) == doctest::Approx(2.0).epsilon(1e-12));

  const auto q = rec(1, Modality::Textual, {1, 0}, {{C::UpperBody, {1, 0}}});
  const auto g = rec(2, Modality::Visual, {0.5, std::sqrt(0.75)},
                     {{C::UpperBody, {0.8, 0.6}}, {C::Shoes, {1, 1}}});
  CHECK(combined_score(q, g, 0.5) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(combined_score(q, g, 0.0) == cosine(q.global(), g.global()));
  const auto bare = rec(3, Modality::Visual, {0.5, std::sqrt(0.75)});
  CHECK(combined_score(q, bare, 1.0) == cosine(q.global(), bare.global()));

  const auto wide = rec(4, Modality::Visual, {1, 0, 0});
  CHECK_THROWS_AS(combined_score(q, wide, 1.0), Error);
}

TEST_CASE("ranking order and ties") {
  const std::vector<double> scores{0.5, 0.9, 0.5, 0.9, -1.0};
  const auto r = rank_by_scores(0, scores);
  CHECK(r.indices == std::vector<std::size_t>{1, 3, 0, 2, 4});
  CHECK(std::is_sorted(r.scores.rbegin(), r.scores.rend()));
}

TEST_CASE("recall_at_k") {
  const std::vector<RankingResult> rs{ranking(0, {3, 1, 2}), ranking(1, {0, 2, 1})};
  const Relevance top{{3}, {0}};
  CHECK(recall_at_k(rs, top, 1) == 1.0);
  const Relevance none{{}, {}};
  for (std::size_t k : {1, 2, 3, 10}) CHECK(recall_at_k(rs, none, k) == 0.0);

  const std::vector<RankingResult> two{ranking(0, {0, 7, 1, 2, 3, 4, 5, 6}),
                                       ranking(1, {0, 1, 2, 3, 7, 4, 5, 6})};
  const Relevance rel{{7}, {7}};
  CHECK(recall_at_k(two, rel, 1) == 0.0);
  CHECK(recall_at_k(two, rel, 5) == 1.0);
  CHECK(recall_at_k(two, rel, 10) == 1.0);
  CHECK(recall_at_k(two, rel, 2) == 0.5);
  CHECK_THROWS_AS(recall_at_k(two, rel, 0), Error);
}

TEST_CASE("mean_ap") {
  CHECK(average_precision(ranking(0, {4, 1, 2}), {4}) == 1.0);
  CHECK(average_precision(ranking(0, {1, 4, 2}), {4}) == 0.5);
  CHECK(average_precision(ranking(0, {4, 1, 5, 2}), {4, 5}) == doctest::Approx((1.0 + 2.0 / 3.0) / 2));
  const std::vector<RankingResult> rs{ranking(0, {1, 0}), ranking(1, {0, 1})};
  CHECK(mean_ap(rs, Relevance{{0}, {0}}) == doctest::Approx(0.75));
  try {
    mean_ap(rs, Relevance{{0}, {}});
    FAIL("expected NoRelevantItems");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoRelevantItems);
  }
}

TEST_CASE("metric properties on random rankings") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 50; ++t) {
    std::vector<RankingResult> rs;
    Relevance rel;
    for (std::size_t q = 0; q < 6; ++q) {
      std::vector<std::size_t> order(9);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      rs.push_back(ranking(q, order));
      std::set<std::size_t> r{order[rng() % 9]};
      if (rng() % 2) r.insert(order[rng() % 9]);
      rel.push_back(r);
    }
    double prev = 0.0;
    for (std::size_t k = 1; k <= 9; ++k) {
      const double r = recall_at_k(rs, rel, k);
      CHECK(r >= prev);
      prev = r;
    }
    CHECK(prev == 1.0);
    const double m = mean_ap(rs, rel);
    CHECK((m >= 0.0 && m <= 1.0));
    // Query order does not matter.
    std::vector<RankingResult> rev(rs.rbegin(), rs.rend());
    CHECK(mean_ap(rev, rel) == doctest::Approx(m).epsilon(1e-15));
  }
}

TEST_CASE("ranking is invariant under positive rescaling") {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random_rec = [&](int id, Modality m, double scale) {
    std::vector<double> g(5), a(5);
    for (auto& x : g) x = n(rng);
    for (auto& x : a) x = n(rng);
    auto gs = g, as = a;
    for (auto& x : gs) x *= scale;
    for (auto& x : as) x *= scale;
    return std::pair{rec(id, m, g, {{AttributeCategory::Head, a}}),
                     rec(id, m, gs, {{AttributeCategory::Head, as}})};
  };
  std::vector<EmbeddingRecord> q, qs, g, gs;
  for (int i = 0; i < 5; ++i) {
    auto [a, b] = random_rec(i, Modality::Textual, 3.0);
    q.push_back(a);
    qs.push_back(b);
  }
  for (int i = 0; i < 20; ++i) {
    auto [a, b] = random_rec(i % 5, Modality::Visual, 0.25);
    g.push_back(a);
    gs.push_back(b);
  }
  const auto r1 = rank_gallery(q, g, 1.0);
  const auto r2 = rank_gallery(qs, gs, 1.0);
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i].indices == r2[i].indices);
}

TEST_CASE("probe") {
  using C = AttributeCategory;
  const auto query = rec(1, Modality::Textual, {1, 0}, {{C::UpperBody, {1, 0}}, {C::LowerBody, {0, 1}}});
  const auto target = rec(1, Modality::Visual, {1, 0}, {{C::UpperBody, {1, 0}}, {C::LowerBody, {0, 1}}});
  const auto distractor = rec(2, Modality::Visual, {1, 0}, {{C::UpperBody, {0, 1}}, {C::LowerBody, {1, 0}}});
  const std::vector<ProbeCase> cases(10, ProbeCase{query, target, distractor});
  CHECK(probe_malpositioned(cases, 1.0) == 1.0);

  // Identical globals and lambda 0: every case is a tie settled by the coin.
  const std::vector<ProbeCase> ties(400, ProbeCase{query, target, distractor});
  const double acc = probe_malpositioned(ties, 0.0, 5);
  CHECK(acc >= 0.4);
  CHECK(acc <= 0.6);
  CHECK(probe_malpositioned(ties, 0.0, 5) == acc);
}

TEST_CASE("attribute retrieval") {
  const auto resources = ParserResources::load(default_resource_dir());
  const TextFeaturizer featurizer(resources, 0.3);
  ModelShape shape;
  shape.visual_global_in = 2;
  shape.visual_attr_in = 2;
  shape.textual_in = 300;
  shape.dim = 2;
  std::mt19937_64 rng(1);
  Model model = Model::random(shape, rng);
  for (auto& e : model.visual_attr) e = SlotEncoder::identity(2);

  // Gallery of four upper-body items; the query embedding decides the order.
  std::vector<RawRecord> gallery;
  const std::vector<std::pair<std::vector<double>, std::string>> items{
      {{1, 0}, "black"}, {{0, 1}, "white"}, {{1, 0.1}, "black"}, {{-1, 0}, "red"}};
  for (std::size_t i = 0; i < items.size(); ++i) {
    RawRecord r;
    r.person_id = static_cast<int>(i);
    r.global = {1, 0};
    r.attrs[index_of(AttributeCategory::UpperBody)] = items[i].first;
    r.labels[index_of(AttributeCategory::UpperBody)] = items[i].second;
    gallery.push_back(r);
  }
  RawRecord no_upper;
  no_upper.global = {1, 0};
  gallery.push_back(no_upper);

  // Point the textual attribute encoder at (1, 0) for every input.
  model.textual_attr.layers()[0].weight.setZero();
  model.textual_attr.layers()[0].bias = Eigen::Vector2d(1, 0);
  const auto res = attribute_retrieve("black shirt", gallery, model, featurizer,
                                      AttributeCategory::UpperBody, "black");
  CHECK(res.ranking.indices == std::vector<std::size_t>{0, 2, 1, 3});
  CHECK(res.targets == 2);
  CHECK(*res.r1 == 1.0);
  CHECK(*res.map == 1.0);

  const auto white = attribute_retrieve("white shirt", gallery, model, featurizer,
                                        AttributeCategory::UpperBody, "white");
  CHECK(*white.map == doctest::Approx(1.0 / 3.0));
  CHECK(*white.r1 == 0.0);

  // Parses to Bags, but no gallery item has a bag: empty result, no error.
  const auto bags = attribute_retrieve("a backpack", gallery, model, featurizer,
                                       AttributeCategory::Bags, "black");
  CHECK(bags.ranking.indices.empty());
  CHECK_FALSE(bags.r1.has_value());
  CHECK_FALSE(bags.map.has_value());

  try {
    attribute_retrieve("black shirt", gallery, model, featurizer, AttributeCategory::Shoes, "black");
    FAIL("expected PhraseUnassignable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PhraseUnassignable);
  }
}

TEST_CASE("global-only scoring equals lambda 0") {
  SyntheticSpec s;
  s.n_identities = 10;
  s.values_per_category = 4;
  const auto resources = ParserResources::load(default_resource_dir());
  const TextFeaturizer f(resources, 0.3);
  const DataBundle data = bundle_from_synthetic(gen_synthetic(s), f);
  TrainConfig c;
  c.embedding_dim = 16;
  const Checkpoint ckpt = initial_checkpoint(data.train, c);
  const auto a = evaluate_retrieval(ckpt.model, data.val, 0.0, ScoringMode::GlobalOnly);
  const auto b = evaluate_retrieval(ckpt.model, data.val, 0.0);
  CHECK(a.r1 == b.r1);
  CHECK(a.map == b.map);
  CHECK(a.queries == 20);
}
