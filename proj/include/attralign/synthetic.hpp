#ifndef ATTRALIGN_SYNTHETIC_HPP
#define ATTRALIGN_SYNTHETIC_HPP

// Synthetic person-search data with a shared attribute vocabulary, so that
// different identities wear the same attribute values and surrogate
// positives exist by construction.
//
// Each identity draws one value per category (identities get distinct value
// combinations). A value is a colour name; every category shares the same
// colour list, which is what makes swapped-attribute distractors possible.
// Visual records hold noisy per-category value codes plus a global feature
// that superimposes all five; textual records are templated sentences.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "attralign/core.hpp"
#include "attralign/dataset.hpp"

namespace attralign {

struct SyntheticSpec {
  std::size_t n_identities = 50;
  std::size_t values_per_category = 8;
  double noise_sigma = 0.1;
  std::size_t records_per_identity = 4;      // train records per modality
  std::size_t val_records_per_identity = 2;  // val records per modality
  std::size_t d_in = 32;
  std::uint64_t seed = 7;
  std::size_t grid_height = 8;  // 0 disables segmentation labels
  std::size_t grid_width = 4;
  std::size_t probe_cases = 200;

  void validate() const;  // throws InvalidSpec
};

SyntheticSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const SyntheticSpec& spec);

using ValueCombo = std::array<std::size_t, kNumAttributes>;

struct SyntheticData {
  std::vector<RawRecord> train;
  std::vector<RawRecord> val;
  std::vector<RawProbeCase> probe;
  std::vector<ValueCombo> identity_values;  // ground-truth value index per category
};

// Colour names used as attribute values, in value-index order.
const std::vector<std::string>& synthetic_value_names();

// Deterministic in the spec (including the seed). Textual records carry text
// only; featurize them (or write and re-read the files) before training.
SyntheticData gen_synthetic(const SyntheticSpec& spec);

// Writes train.jsonl, val.jsonl, probe.jsonl and spec.json into `dir`.
void write_synthetic(const SyntheticData& data, const SyntheticSpec& spec,
                     const std::filesystem::path& dir);

}  // namespace attralign

#endif  // ATTRALIGN_SYNTHETIC_HPP
