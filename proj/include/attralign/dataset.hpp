#ifndef ATTRALIGN_DATASET_HPP
#define ATTRALIGN_DATASET_HPP

// Line-delimited JSON datasets of raw (pre-encoder) records. Textual records
// normally carry a sentence and are turned into raw features at load time by
// the description parser.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attralign/core.hpp"
#include "attralign/textparse.hpp"

namespace attralign {

struct SegLabels {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> labels;  // row-major, 0 = background, 1 + category index otherwise
};

struct RawRecord {
  int person_id = 0;
  Modality modality = Modality::Visual;
  std::vector<double> global;
  std::array<std::optional<std::vector<double>>, kNumAttributes> attrs;
  std::optional<SegLabels> seg;
  // Ground-truth attribute value names (e.g. "black"), used for attribute retrieval.
  std::array<std::optional<std::string>, kNumAttributes> labels;
  std::optional<std::string> text;

  bool present(AttributeCategory c) const { return attrs[index_of(c)].has_value(); }
};

// Raw feature widths shared by every record of one modality.
struct FeatureDims {
  std::size_t visual_global = 0;
  std::size_t visual_attr = 0;
  std::size_t textual = 0;
};

struct Dataset {
  std::vector<RawRecord> visual;
  std::vector<RawRecord> textual;

  FeatureDims dims() const;
  // Grid shape of the first visual record with labels, if any.
  std::optional<std::pair<std::size_t, std::size_t>> grid_shape() const;
};

// Fills in raw textual features from the record's sentence: the global slot
// is the mean word vector of every token, each assigned category gets the
// mean vector of its phrase tokens.
class TextFeaturizer {
 public:
  TextFeaturizer(const ParserResources& resources, double theta)
      : resources_(&resources), theta_(theta) {}

  void featurize(RawRecord& record) const;
  RawRecord from_text(int person_id, std::string_view text) const;
  // Raw feature of a standalone attribute phrase.
  std::vector<double> phrase_features(std::span<const std::string> tokens) const;

  const ParserResources& resources() const { return *resources_; }
  double theta() const { return theta_; }

 private:
  const ParserResources* resources_;
  double theta_;
};

nlohmann::json record_to_json(const RawRecord& record);
// `where` prefixes error messages, typically "file:line".
RawRecord record_from_json(const nlohmann::json& j, std::string_view where);

// Reads one record per non-empty line. Textual records without precomputed
// features are featurized when a featurizer is given and rejected otherwise.
// Any malformed line aborts the whole read with its line number.
Dataset read_dataset(std::istream& in, std::string_view source, const TextFeaturizer* featurizer);
Dataset read_dataset(const std::filesystem::path& path, const TextFeaturizer* featurizer);

void write_records(std::ostream& out, std::span<const RawRecord> records);

// One malpositioned-matching case: a description, the person it describes
// and a distractor whose attribute values are the same multiset, rearranged.
struct RawProbeCase {
  RawRecord query;
  RawRecord target;
  RawRecord distractor;
};

std::vector<RawProbeCase> read_probe_cases(const std::filesystem::path& path,
                                           const TextFeaturizer& featurizer);
void write_probe_cases(std::ostream& out, std::span<const RawProbeCase> cases);

}  // namespace attralign

#endif  // ATTRALIGN_DATASET_HPP
