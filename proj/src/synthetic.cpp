#include "attralign/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "attralign/error.hpp"

namespace attralign {
namespace {

using nlohmann::json;

const std::array<std::vector<std::string>, kNumAttributes>& garment_words() {
  static const std::array<std::vector<std::string>, kNumAttributes> words = {{
      {"hat", "cap", "beanie"},
      {"shirt", "jacket", "sweater", "top", "tshirt", "coat", "blouse"},
      {"pants", "skirt", "shorts", "jeans", "trousers"},
      {"shoes", "sneakers", "boots", "sandals"},
      {"backpack", "bag", "handbag", "purse"},
  }};
  return words;
}

const std::vector<std::string> kPeople = {"man", "woman", "girl", "boy", "person", "lady", "guy"};
const std::vector<std::string> kPronouns = {"he", "she", "they"};

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec) : spec_(spec), rng_(spec.seed) {}

  SyntheticData run() {
    draw_tables();
    draw_identities();
    SyntheticData out;
    out.identity_values = identities_;
    for (std::size_t id = 0; id < identities_.size(); ++id) {
      for (std::size_t r = 0; r < spec_.records_per_identity; ++r) {
        out.train.push_back(visual(static_cast<int>(id), identities_[id]));
      }
      for (std::size_t r = 0; r < spec_.records_per_identity; ++r) {
        out.train.push_back(textual(static_cast<int>(id), identities_[id]));
      }
    }
    for (std::size_t id = 0; id < identities_.size(); ++id) {
      for (std::size_t r = 0; r < spec_.val_records_per_identity; ++r) {
        out.val.push_back(visual(static_cast<int>(id), identities_[id]));
      }
      for (std::size_t r = 0; r < spec_.val_records_per_identity; ++r) {
        out.val.push_back(textual(static_cast<int>(id), identities_[id]));
      }
    }
    out.probe = probe_cases();
    return out;
  }

 private:
  std::vector<double> gaussian(double scale) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(spec_.d_in);
    for (double& x : v) x = scale * n(rng_);
    return v;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  void draw_tables() {
    const std::size_t nv = spec_.values_per_category;
    const double global_scale = 1.0 / std::sqrt(static_cast<double>(kNumAttributes));
    for (std::size_t a = 0; a < kNumAttributes; ++a) {
      attr_codes_[a].clear();
      global_codes_[a].clear();
      for (std::size_t v = 0; v < nv; ++v) attr_codes_[a].push_back(gaussian(1.0));
      for (std::size_t v = 0; v < nv; ++v) global_codes_[a].push_back(gaussian(global_scale));
    }
  }

  void draw_identities() {
    std::set<ValueCombo> seen;
    while (identities_.size() < spec_.n_identities) {
      ValueCombo combo;
      for (auto& v : combo) v = pick(spec_.values_per_category);
      if (seen.insert(combo).second) identities_.push_back(combo);
    }
  }

  RawRecord visual(int person_id, const ValueCombo& values) {
    RawRecord r;
    r.person_id = person_id;
    r.modality = Modality::Visual;
    r.global.assign(spec_.d_in, 0.0);
    for (std::size_t a = 0; a < kNumAttributes; ++a) {
      const auto& code = global_codes_[a][values[a]];
      for (std::size_t i = 0; i < spec_.d_in; ++i) r.global[i] += code[i];
    }
    add_noise(r.global);
    for (AttributeCategory c : kAllCategories) {
      const std::size_t a = index_of(c);
      auto feat = attr_codes_[a][values[a]];
      add_noise(feat);
      r.attrs[a] = std::move(feat);
      r.labels[a] = synthetic_value_names()[values[a]];
    }
    if (spec_.grid_height > 0) r.seg = layout(values);
    return r;
  }

  void add_noise(std::vector<double>& v) {
    if (spec_.noise_sigma == 0.0) return;
    std::normal_distribution<double> n(0.0, spec_.noise_sigma);
    for (double& x : v) x += n(rng_);
  }

  // Body layout: head on top, upper body, lower body, shoes on the last row.
  // Even lower-body values are long garments, odd ones leave a background
  // row above the shoes. Even bag values hang on the right, odd ones are a
  // single handbag cell on the left.
  SegLabels layout(const ValueCombo& values) const {
    const std::size_t h = spec_.grid_height;
    const std::size_t w = spec_.grid_width;
    SegLabels s{h, w, std::vector<int>(h * w, 0)};
    auto set = [&](std::size_t row, std::size_t col, AttributeCategory c) {
      s.labels[row * w + col] = static_cast<int>(index_of(c)) + 1;
    };
    const std::size_t head_end = std::max<std::size_t>(1, h / 8);
    const std::size_t upper_end = h / 2;
    const std::size_t lower_end = values[index_of(AttributeCategory::LowerBody)] % 2 == 0 ? h - 1 : h - 2;
    for (std::size_t row = 0; row < h; ++row) {
      for (std::size_t col = 0; col < w; ++col) {
        if (row < head_end) {
          if (col > 0 && col + 1 < w) set(row, col, AttributeCategory::Head);
        } else if (row < upper_end) {
          set(row, col, AttributeCategory::UpperBody);
        } else if (row < lower_end) {
          set(row, col, AttributeCategory::LowerBody);
        } else if (row == h - 1) {
          set(row, col, AttributeCategory::Shoes);
        }
      }
    }
    if (values[index_of(AttributeCategory::Bags)] % 2 == 0) {
      for (std::size_t row = h / 4; row <= h / 2; ++row) set(row, w - 1, AttributeCategory::Bags);
    } else {
      set(h / 2, 0, AttributeCategory::Bags);
    }
    return s;
  }

  std::string phrase(const ValueCombo& values, AttributeCategory c) {
    const auto& nouns = garment_words()[index_of(c)];
    return synthetic_value_names()[values[index_of(c)]] + " " + nouns[pick(nouns.size())];
  }

  std::string sentence(const ValueCombo& values) {
    const std::string person = kPeople[pick(kPeople.size())];
    const std::string head = phrase(values, AttributeCategory::Head);
    const std::string upper = phrase(values, AttributeCategory::UpperBody);
    const std::string lower = phrase(values, AttributeCategory::LowerBody);
    const std::string shoes = phrase(values, AttributeCategory::Shoes);
    const std::string bag = phrase(values, AttributeCategory::Bags);
    switch (pick(4)) {
      case 0:
        return "a " + person + " wearing a " + head + ", a " + upper + " and " + lower + ", with " +
               shoes + " and carrying a " + bag + ".";
      case 1:
        return "the " + person + " is in a " + upper + " and " + lower + ". " +
               kPronouns[pick(kPronouns.size())] + " wears a " + head + " and " + shoes +
               " and carries a " + bag + ".";
      case 2:
        return person + " with a " + head + ", wearing a " + upper + " with " + lower + " and " +
               shoes + ", holding a " + bag + ".";
      default:
        return "a " + person + " in " + upper + ", " + lower + " and " + shoes + ", wearing a " +
               head + " and carrying a " + bag + ".";
    }
  }

  RawRecord textual(int person_id, const ValueCombo& values) {
    RawRecord r;
    r.person_id = person_id;
    r.modality = Modality::Textual;
    r.text = sentence(values);
    return r;
  }

  std::vector<RawProbeCase> probe_cases() {
    std::vector<RawProbeCase> cases;
    std::size_t cursor = 0;
    std::size_t misses = 0;
    while (cases.size() < spec_.probe_cases && misses < identities_.size()) {
      const int id = static_cast<int>(cursor % identities_.size());
      ++cursor;
      const auto& values = identities_[static_cast<std::size_t>(id)];
      std::vector<std::pair<std::size_t, std::size_t>> swappable;
      for (std::size_t a = 0; a < kNumAttributes; ++a) {
        for (std::size_t b = a + 1; b < kNumAttributes; ++b) {
          if (values[a] != values[b]) swappable.emplace_back(a, b);
        }
      }
      if (swappable.empty()) {
        ++misses;
        continue;
      }
      misses = 0;
      const auto [a, b] = swappable[pick(swappable.size())];
      ValueCombo swapped = values;
      std::swap(swapped[a], swapped[b]);
      RawProbeCase c;
      c.query = textual(id, values);
      c.target = visual(id, values);
      c.distractor = visual(id, swapped);
      cases.push_back(std::move(c));
    }
    return cases;
  }

  const SyntheticSpec& spec_;
  std::mt19937_64 rng_;
  std::array<std::vector<std::vector<double>>, kNumAttributes> attr_codes_;
  std::array<std::vector<std::vector<double>>, kNumAttributes> global_codes_;
  std::vector<ValueCombo> identities_;
};

}  // namespace

const std::vector<std::string>& synthetic_value_names() {
  static const std::vector<std::string> names = {"black", "white", "red",    "blue",
                                                 "green", "yellow", "gray",  "purple",
                                                 "brown", "pink",  "orange", "tan"};
  return names;
}

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidSpec, why); };
  if (n_identities < 2) fail("n_identities must be at least 2");
  if (values_per_category < 1 || values_per_category > synthetic_value_names().size()) {
    fail("values_per_category must be in [1, " + std::to_string(synthetic_value_names().size()) +
         "]");
  }
  if (values_per_category >= n_identities) {
    fail("values_per_category must be smaller than n_identities so identities share values");
  }
  if (std::pow(static_cast<double>(values_per_category), static_cast<double>(kNumAttributes)) <
      static_cast<double>(n_identities)) {
    fail("not enough distinct value combinations for n_identities");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be >= 0");
  if (records_per_identity < 1) fail("records_per_identity must be at least 1");
  if (d_in < 1) fail("d_in must be positive");
  if (grid_height != 0 && (grid_height < 4 || grid_width < 2)) {
    fail("segmentation grids need height >= 4 and width >= 2");
  }
}

SyntheticSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidSpec, "synthetic spec must be a JSON object");
  static const std::set<std::string> known = {
      "n_identities", "values_per_category", "noise_sigma", "records_per_identity",
      "val_records_per_identity", "d_in", "seed", "grid_height", "grid_width", "probe_cases"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw Error(ErrorKind::InvalidSpec, "unknown spec field '" + key + "'");
  }
  SyntheticSpec s;
  try {
    s.n_identities = j.value("n_identities", s.n_identities);
    s.values_per_category = j.value("values_per_category", s.values_per_category);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    s.records_per_identity = j.value("records_per_identity", s.records_per_identity);
    s.val_records_per_identity = j.value("val_records_per_identity", s.val_records_per_identity);
    s.d_in = j.value("d_in", s.d_in);
    s.seed = j.value("seed", s.seed);
    s.grid_height = j.value("grid_height", s.grid_height);
    s.grid_width = j.value("grid_width", s.grid_width);
    s.probe_cases = j.value("probe_cases", s.probe_cases);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidSpec, std::string("bad synthetic spec: ") + e.what());
  }
  s.validate();
  return s;
}

json spec_to_json(const SyntheticSpec& s) {
  return {{"n_identities", s.n_identities},
          {"values_per_category", s.values_per_category},
          {"noise_sigma", s.noise_sigma},
          {"records_per_identity", s.records_per_identity},
          {"val_records_per_identity", s.val_records_per_identity},
          {"d_in", s.d_in},
          {"seed", s.seed},
          {"grid_height", s.grid_height},
          {"grid_width", s.grid_width},
          {"probe_cases", s.probe_cases}};
}

SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  return Generator(spec).run();
}

void write_synthetic(const SyntheticData& data, const SyntheticSpec& spec,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + (dir / name).string());
    return out;
  };
  {
    auto out = open("train.jsonl");
    write_records(out, data.train);
  }
  {
    auto out = open("val.jsonl");
    write_records(out, data.val);
  }
  {
    auto out = open("probe.jsonl");
    write_probe_cases(out, data.probe);
  }
  {
    auto out = open("spec.json");
    out << spec_to_json(spec).dump(2) << '\n';
  }
}

}  // namespace attralign
