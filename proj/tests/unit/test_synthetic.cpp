#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "attralign/error.hpp"
#include "attralign/sampler.hpp"
#include "attralign/synthetic.hpp"

using namespace attralign;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("attralign_synth_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> value_labels(const RawRecord& r) {
  std::vector<std::string> out;
  for (const auto& l : r.labels) out.push_back(l.value_or(""));
  return out;
}

}  // namespace

TEST_CASE("spec validation") {
  SyntheticSpec s;
  CHECK_NOTHROW(s.validate());
  SyntheticSpec same = s;
  same.values_per_category = 50;
  CHECK_THROWS_AS(same.validate(), Error);
  SyntheticSpec noisy = s;
  noisy.noise_sigma = -1.0;
  CHECK_THROWS_AS(noisy.validate(), Error);
  SyntheticSpec few = s;
  few.values_per_category = 1;
  few.n_identities = 2;
  CHECK_THROWS_AS(few.validate(), Error);
  SyntheticSpec grid = s;
  grid.grid_height = 2;
  CHECK_THROWS_AS(grid.validate(), Error);

  CHECK_THROWS_AS(spec_from_json(nlohmann::json{{"n_identities", 10}, {"colour", 1}}), Error);
  const auto round = spec_from_json(spec_to_json(s));
  CHECK(spec_to_json(round) == spec_to_json(s));
}

TEST_CASE("zero noise: identities sharing a value share the raw feature") {
  SyntheticSpec s;
  s.n_identities = 20;
  s.values_per_category = 4;
  s.noise_sigma = 0.0;
  const auto data = gen_synthetic(s);
  const auto upper = index_of(AttributeCategory::UpperBody);
  std::map<std::string, std::vector<double>> by_value;
  std::size_t shared = 0;
  for (const auto& r : data.train) {
    if (r.modality != Modality::Visual) continue;
    const auto& label = *r.labels[upper];
    auto [it, fresh] = by_value.emplace(label, *r.attrs[upper]);
    if (!fresh) {
      CHECK(it->second == *r.attrs[upper]);
      ++shared;
    }
  }
  CHECK(shared > 0);
}

TEST_CASE("same seed gives byte-identical files") {
  SyntheticSpec s;
  s.n_identities = 12;
  s.values_per_category = 3;
  s.probe_cases = 20;
  const auto a = scratch("a");
  const auto b = scratch("b");
  write_synthetic(gen_synthetic(s), s, a);
  write_synthetic(gen_synthetic(s), s, b);
  for (const char* f : {"train.jsonl", "val.jsonl", "probe.jsonl", "spec.json"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK_FALSE(slurp(a / f).empty());
  }
  s.seed = 8;
  const auto c = scratch("c");
  write_synthetic(gen_synthetic(s), s, c);
  CHECK(slurp(a / "train.jsonl") != slurp(c / "train.jsonl"));
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(c);
}

TEST_CASE("fixture layout") {
  const SyntheticSpec s;
  const auto data = gen_synthetic(s);
  CHECK(data.identity_values.size() == 50);
  std::set<ValueCombo> unique(data.identity_values.begin(), data.identity_values.end());
  CHECK(unique.size() == 50);
  CHECK(data.train.size() == 50 * 4 * 2);
  CHECK(data.val.size() == 50 * 2 * 2);
  CHECK(data.probe.size() == 200);
  for (const auto& r : data.train) {
    if (r.modality == Modality::Textual) {
      CHECK(r.text.has_value());
    } else {
      CHECK(r.seg.has_value());
      CHECK(r.global.size() == 32);
    }
  }
}

TEST_CASE("probe distractors rearrange the target's values") {
  const auto data = gen_synthetic(SyntheticSpec{});
  for (const auto& c : data.probe) {
    auto t = value_labels(c.target);
    auto d = value_labels(c.distractor);
    CHECK(t != d);
    std::sort(t.begin(), t.end());
    std::sort(d.begin(), d.end());
    CHECK(t == d);
    CHECK(c.query.person_id == c.target.person_id);
  }
}

TEST_CASE("ground-truth codes produce cross-identity surrogate pairs") {
  SyntheticSpec s;
  s.noise_sigma = 0.0;
  const auto data = gen_synthetic(s);
  // One visual record per identity; the pool is paired with itself, standing
  // in for a perfectly aligned textual side.
  std::vector<const RawRecord*> firsts(s.n_identities, nullptr);
  for (const auto& r : data.train) {
    if (r.modality == Modality::Visual && !firsts[static_cast<std::size_t>(r.person_id)]) {
      firsts[static_cast<std::size_t>(r.person_id)] = &r;
    }
  }
  for (AttributeCategory c : kAllCategories) {
    SamplerInput in;
    in.k = 8;
    for (std::size_t i = 0; i < firsts.size(); ++i) {
      in.visual.push_back({i, EmbeddingVector(*firsts[i]->attrs[index_of(c)])});
    }
    in.textual = in.visual;
    std::size_t cross = 0;
    for (const auto& [v, ts] : k_reciprocal_oracle(in)) {
      for (std::size_t t : ts) {
        if (t != v && firsts[v]->labels[index_of(c)] == firsts[t]->labels[index_of(c)]) ++cross;
      }
    }
    CHECK(cross > 0);
  }
}
