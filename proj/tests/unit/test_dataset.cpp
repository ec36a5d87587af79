#include <doctest.h>

#include <sstream>

#include "attralign/dataset.hpp"
#include "attralign/error.hpp"

using namespace attralign;

namespace {

const ParserResources& shipped() {
  static const ParserResources r = ParserResources::load(default_resource_dir());
  return r;
}

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("records round-trip through JSON lines") {
  RawRecord v;
  v.person_id = 4;
  v.modality = Modality::Visual;
  v.global = {0.1, 0.2, 1.0 / 3.0};
  v.attrs[index_of(AttributeCategory::LowerBody)] = std::vector<double>{1e-300, -2.5};
  v.labels[index_of(AttributeCategory::LowerBody)] = "black";
  v.seg = SegLabels{2, 1, {0, 3}};
  RawRecord t;
  t.person_id = 4;
  t.modality = Modality::Textual;
  t.global = {1.0, 2.0};
  t.attrs[index_of(AttributeCategory::Bags)] = std::vector<double>{3.0, 4.0};

  std::ostringstream out;
  const std::vector<RawRecord> records{v, t};
  write_records(out, records);
  std::istringstream in(out.str());
  const Dataset d = read_dataset(in, "mem", nullptr);
  REQUIRE(d.visual.size() == 1);
  REQUIRE(d.textual.size() == 1);
  CHECK(d.visual[0].global == v.global);
  CHECK(d.visual[0].attrs == v.attrs);
  CHECK(d.visual[0].labels == v.labels);
  CHECK(d.visual[0].seg->labels == v.seg->labels);
  CHECK(d.textual[0].attrs == t.attrs);
  CHECK(d.dims().visual_global == 3);
  CHECK(d.dims().visual_attr == 2);
  CHECK(d.dims().textual == 2);
  CHECK(d.grid_shape() == std::pair<std::size_t, std::size_t>{2, 1});
}

TEST_CASE("textual records with text are featurized at load") {
  const TextFeaturizer f(shipped(), 0.3);
  std::istringstream in(
      R"({"person_id": 2, "modality": "textual", "text": "a girl in white shirt and black skirt"})"
      "\n");
  const Dataset d = read_dataset(in, "mem", &f);
  REQUIRE(d.textual.size() == 1);
  const RawRecord& r = d.textual[0];
  CHECK(r.global.size() == 300);
  CHECK(r.present(AttributeCategory::UpperBody));
  CHECK(r.present(AttributeCategory::LowerBody));
  CHECK_FALSE(r.present(AttributeCategory::Head));
  CHECK(*r.attrs[index_of(AttributeCategory::UpperBody)] ==
        embed_phrase(std::vector<std::string>{"white", "shirt"}, shipped().store));

  std::istringstream again(
      R"({"person_id": 2, "modality": "textual", "text": "a girl in white shirt"})"
      "\n");
  CHECK_THROWS_AS(read_dataset(again, "mem", nullptr), Error);
}

TEST_CASE("malformed lines are rejected with their line number") {
  const std::string good = R"({"person_id": 1, "modality": "visual", "global": [1, 2]})";
  auto fails_at = [&](const std::string& bad, const std::string& where) {
    std::istringstream in(good + "\n\n" + bad + "\n" + good + "\n");
    const std::string msg = message_of([&] { read_dataset(in, "d.jsonl", nullptr); });
    CHECK_MESSAGE(msg.find(where) != std::string::npos, msg);
  };
  fails_at("{not json", "d.jsonl:3");
  fails_at(R"({"person_id": -1, "modality": "visual", "global": [1, 2]})", "d.jsonl:3");
  fails_at(R"({"person_id": 1, "modality": "audio", "global": [1, 2]})", "d.jsonl:3");
  fails_at(R"({"person_id": 1, "modality": "visual", "global": [1, 2, 3]})", "d.jsonl:3");
  fails_at(R"({"person_id": 1, "modality": "visual", "global": [1, "x"]})", "d.jsonl:3");
  fails_at(R"({"person_id": 1, "modality": "visual", "global": [1, 2], "attrs": {"torso": [1]}})",
           "d.jsonl:3");
  fails_at(R"({"person_id": 1, "modality": "visual", "global": [1, 2], "seg": {"height": 2, "width": 2, "labels": [0, 1, 2]}})",
           "d.jsonl:3");
  fails_at(R"({"person_id": 1, "modality": "visual", "global": [1, 2], "seg": {"height": 1, "width": 1, "labels": [9]}})",
           "d.jsonl:3");
}
