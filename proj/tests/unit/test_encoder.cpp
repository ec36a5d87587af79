#include <doctest.h>

#include <random>

#include "attralign/encoder.hpp"
#include "attralign/error.hpp"

using namespace attralign;

namespace {

RawRecord record(Modality m, std::size_t d, int id = 1) {
  RawRecord r;
  r.person_id = id;
  r.modality = m;
  r.global.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) r.global[i] = 0.5 * static_cast<double>(i) - 1.0;
  return r;
}

ModelShape small_shape(std::size_t d_in, std::size_t dim, std::size_t hidden = 0) {
  ModelShape s;
  s.visual_global_in = s.visual_attr_in = s.textual_in = d_in;
  s.dim = dim;
  s.hidden = hidden;
  return s;
}

}  // namespace

TEST_CASE("identity-initialised encoders reproduce their input") {
  Model m(small_shape(4, 4));
  m.visual_global = SlotEncoder::identity(4);
  for (auto& e : m.visual_attr) e = SlotEncoder::identity(4);
  RawRecord r = record(Modality::Visual, 4);
  r.attrs[index_of(AttributeCategory::Shoes)] = std::vector<double>{1, 2, 3, 4};
  const auto e = m.embed(r);
  CHECK(std::vector<double>(e.global().values().begin(), e.global().values().end()) == r.global);
  CHECK(e.attr(AttributeCategory::Shoes) == EmbeddingVector({1, 2, 3, 4}));
}

TEST_CASE("absent raw attributes stay absent") {
  std::mt19937_64 rng(1);
  const Model m = Model::random(small_shape(3, 5), rng);
  RawRecord r = record(Modality::Textual, 3);
  r.attrs[index_of(AttributeCategory::UpperBody)] = std::vector<double>{1, 0, 0};
  const auto e = m.embed(r);
  for (AttributeCategory c : kAllCategories) {
    CHECK(e.present(c) == (c == AttributeCategory::UpperBody));
  }
  CHECK(e.dim() == 5);
}

TEST_CASE("forward keeps batch shape and checks widths") {
  std::mt19937_64 rng(2);
  const Model m = Model::random(small_shape(3, 6, 4), rng);
  std::vector<RawRecord> batch;
  for (int i = 0; i < 64; ++i) batch.push_back(record(Modality::Visual, 3, i));
  for (int i = 0; i < 64; ++i) batch.push_back(record(Modality::Textual, 3, i));
  const auto out = forward(batch, m);
  CHECK(out.size() == 128);
  CHECK(std::count_if(out.begin(), out.end(), [](const auto& e) { return e.modality() == Modality::Visual; }) == 64);

  RawRecord bad = record(Modality::Visual, 4);
  CHECK_THROWS_AS(m.embed(bad), Error);
  RawRecord bad_attr = record(Modality::Visual, 3);
  bad_attr.attrs[0] = std::vector<double>{1, 2};
  CHECK_THROWS_AS(m.embed(bad_attr), Error);
}

TEST_CASE("textual attribute encoder is shared across categories") {
  std::mt19937_64 rng(3);
  const Model m = Model::random(small_shape(3, 4), rng);
  RawRecord r = record(Modality::Textual, 3);
  r.attrs[0] = std::vector<double>{1, 2, 3};
  r.attrs[4] = std::vector<double>{1, 2, 3};
  const auto e = m.embed(r);
  CHECK(e.attr(AttributeCategory::Head) == e.attr(AttributeCategory::Bags));
  CHECK(m.embed_text_attribute(std::vector<double>{1, 2, 3}) == e.attr(AttributeCategory::Head));
}

TEST_CASE("parameter blocks are stable and cover the model") {
  ModelShape s = small_shape(3, 4, 2);
  s.num_classes = 5;
  s.grid_height = 2;
  s.grid_width = 3;
  std::mt19937_64 rng(4);
  const Model a = Model::random(s, rng);
  const Model b = a.zeros_like();
  const auto ba = a.parameter_blocks();
  const auto bb = b.parameter_blocks();
  REQUIRE(ba.size() == bb.size());
  for (std::size_t i = 0; i < ba.size(); ++i) {
    CHECK(ba[i].name == bb[i].name);
    CHECK(ba[i].size == bb[i].size);
  }
  // 6 visual + 2 textual encoders, 2 layers x (weight, bias), then id head and seg head
  CHECK(ba.size() == 8 * 4 + 2 + 2);
  std::size_t total = 0;
  for (const auto& blk : ba) total += blk.size;
  CHECK(total == a.parameter_count());
}

TEST_CASE("adam with zero gradient and no decay leaves parameters unchanged") {
  std::mt19937_64 rng(5);
  Model m = Model::random(small_shape(3, 4), rng);
  const Model before = m;
  Adam adam(m, AdamSettings{0.9, 0.999, 1e-8, 0.0});
  adam.step(m, m.zeros_like(), 1e-2);
  CHECK(m.visual_global.layers()[0].weight == before.visual_global.layers()[0].weight);
  CHECK(adam.steps() == 1);

  // First step moves each parameter by about lr against the gradient sign.
  Model g = m.zeros_like();
  g.visual_global.layers()[0].weight(0, 0) = 3.0;
  const double w0 = m.visual_global.layers()[0].weight(0, 0);
  Adam fresh(m, AdamSettings{0.9, 0.999, 1e-8, 0.0});
  fresh.step(m, g, 1e-2);
  CHECK(m.visual_global.layers()[0].weight(0, 0) == doctest::Approx(w0 - 1e-2).epsilon(1e-6));
}
