#include "attralign/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "attralign/error.hpp"

namespace attralign {
namespace {

using nlohmann::json;

[[noreturn]] void bad(std::string_view where, const std::string& why) {
  throw Error(ErrorKind::MalformedInput, std::string(where) + ": " + why);
}

std::vector<double> read_vector(const json& j, std::string_view where, std::string_view field) {
  if (!j.is_array() || j.empty()) bad(where, "'" + std::string(field) + "' must be a non-empty array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) bad(where, "'" + std::string(field) + "' holds a non-number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(where, "'" + std::string(field) + "' holds a non-finite value");
    out.push_back(x);
  }
  return out;
}

void check_width(std::size_t& expected, std::size_t got, std::string_view where,
                 std::string_view slot) {
  if (expected == 0) {
    expected = got;
  } else if (expected != got) {
    bad(where, std::string(slot) + " features have width " + std::to_string(got) + ", expected " +
                   std::to_string(expected));
  }
}

}  // namespace

FeatureDims Dataset::dims() const {
  FeatureDims d;
  for (const auto& r : visual) {
    if (d.visual_global == 0) d.visual_global = r.global.size();
    for (const auto& a : r.attrs) {
      if (a && d.visual_attr == 0) d.visual_attr = a->size();
    }
  }
  for (const auto& r : textual) {
    if (d.textual == 0) d.textual = r.global.size();
  }
  return d;
}

std::optional<std::pair<std::size_t, std::size_t>> Dataset::grid_shape() const {
  for (const auto& r : visual) {
    if (r.seg) return std::make_pair(r.seg->height, r.seg->width);
  }
  return std::nullopt;
}

void TextFeaturizer::featurize(RawRecord& record) const {
  if (!record.text) {
    throw Error(ErrorKind::MalformedInput, "textual record has neither text nor features");
  }
  const auto parsed = parse_description(*record.text, *resources_, theta_);
  if (parsed.tokens.empty()) throw Error(ErrorKind::MalformedInput, "textual record has empty text");
  record.global = embed_phrase(parsed.tokens, resources_->store);
  for (auto& slot : record.attrs) slot.reset();
  for (const auto& [category, tokens] : parsed.attributes) {
    record.attrs[index_of(category)] = embed_phrase(tokens, resources_->store);
  }
}

RawRecord TextFeaturizer::from_text(int person_id, std::string_view text) const {
  RawRecord r;
  r.person_id = person_id;
  r.modality = Modality::Textual;
  r.text = std::string(text);
  featurize(r);
  return r;
}

std::vector<double> TextFeaturizer::phrase_features(std::span<const std::string> tokens) const {
  return embed_phrase(tokens, resources_->store);
}

json record_to_json(const RawRecord& r) {
  json j;
  j["person_id"] = r.person_id;
  j["modality"] = std::string(modality_name(r.modality));
  if (r.text) j["text"] = *r.text;
  // Textual records carrying text are featurized on load; their features
  // are not written back out.
  const bool write_features = r.modality == Modality::Visual || !r.text;
  if (write_features && !r.global.empty()) {
    j["global"] = r.global;
    json attrs = json::object();
    for (AttributeCategory c : kAllCategories) {
      if (r.present(c)) attrs[std::string(category_key(c))] = *r.attrs[index_of(c)];
    }
    j["attrs"] = attrs;
  }
  if (r.seg) {
    j["seg"] = {{"height", r.seg->height}, {"width", r.seg->width}, {"labels", r.seg->labels}};
  }
  json labels = json::object();
  for (AttributeCategory c : kAllCategories) {
    if (r.labels[index_of(c)]) labels[std::string(category_key(c))] = *r.labels[index_of(c)];
  }
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

RawRecord record_from_json(const json& j, std::string_view where) {
  if (!j.is_object()) bad(where, "record must be a JSON object");
  RawRecord r;
  if (!j.contains("person_id") || !j["person_id"].is_number_integer()) {
    bad(where, "missing integer 'person_id'");
  }
  r.person_id = j["person_id"].get<int>();
  if (r.person_id < 0) bad(where, "'person_id' must be non-negative");
  if (!j.contains("modality") || !j["modality"].is_string()) bad(where, "missing 'modality'");
  const auto modality = parse_modality(j["modality"].get<std::string>());
  if (!modality) bad(where, "'modality' must be visual or textual");
  r.modality = *modality;

  if (j.contains("text")) {
    if (!j["text"].is_string()) bad(where, "'text' must be a string");
    r.text = j["text"].get<std::string>();
  }
  if (j.contains("global")) r.global = read_vector(j["global"], where, "global");
  if (j.contains("attrs")) {
    const auto& attrs = j["attrs"];
    if (!attrs.is_object()) bad(where, "'attrs' must be an object");
    for (const auto& [key, value] : attrs.items()) {
      const auto c = parse_category(key);
      if (!c || key != category_key(*c)) bad(where, "unknown attribute '" + key + "'");
      r.attrs[index_of(*c)] = read_vector(value, where, key);
    }
  }
  if (r.global.empty() && r.modality == Modality::Visual) bad(where, "visual record needs 'global'");
  if (r.global.empty() && !r.text) bad(where, "textual record needs 'text' or 'global'");
  if (r.global.empty()) {
    for (const auto& a : r.attrs) {
      if (a) bad(where, "'attrs' given without 'global'");
    }
  }

  if (j.contains("seg")) {
    const auto& seg = j["seg"];
    if (!seg.is_object() || !seg.contains("height") || !seg.contains("width") ||
        !seg.contains("labels") || !seg["labels"].is_array()) {
      bad(where, "'seg' needs height, width and labels");
    }
    SegLabels s;
    s.height = seg["height"].get<std::size_t>();
    s.width = seg["width"].get<std::size_t>();
    if (s.height == 0 || s.width == 0) bad(where, "'seg' dimensions must be positive");
    for (const auto& v : seg["labels"]) {
      if (!v.is_number_integer()) bad(where, "'seg.labels' must be integers");
      const int label = v.get<int>();
      if (label < 0 || label > static_cast<int>(kNumAttributes)) {
        bad(where, "'seg.labels' entry out of range [0, 5]");
      }
      s.labels.push_back(label);
    }
    if (s.labels.size() != s.height * s.width) bad(where, "'seg.labels' size != height * width");
    r.seg = std::move(s);
  }
  if (j.contains("labels")) {
    const auto& labels = j["labels"];
    if (!labels.is_object()) bad(where, "'labels' must be an object");
    for (const auto& [key, value] : labels.items()) {
      const auto c = parse_category(key);
      if (!c || key != category_key(*c) || !value.is_string()) {
        bad(where, "bad attribute label '" + key + "'");
      }
      r.labels[index_of(*c)] = value.get<std::string>();
    }
  }
  return r;
}

Dataset read_dataset(std::istream& in, std::string_view source, const TextFeaturizer* featurizer) {
  Dataset ds;
  FeatureDims dims;
  std::optional<std::pair<std::size_t, std::size_t>> grid;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      bad(where, std::string("invalid JSON: ") + e.what());
    }
    RawRecord r;
    try {
      r = record_from_json(j, where);
      if (r.modality == Modality::Textual && r.global.empty()) {
        if (featurizer == nullptr) bad(where, "textual record needs features (no parser available)");
        featurizer->featurize(r);
      }
    } catch (const json::exception& e) {
      bad(where, e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MalformedInput && std::string_view(e.what()).starts_with(where)) {
        throw;
      }
      bad(where, e.what());
    }

    if (r.modality == Modality::Visual) {
      check_width(dims.visual_global, r.global.size(), where, "visual global");
      for (const auto& a : r.attrs) {
        if (a) check_width(dims.visual_attr, a->size(), where, "visual attribute");
      }
      if (r.seg) {
        const auto shape = std::make_pair(r.seg->height, r.seg->width);
        if (grid && *grid != shape) bad(where, "segmentation grid shape differs from earlier records");
        grid = shape;
      }
      ds.visual.push_back(std::move(r));
    } else {
      check_width(dims.textual, r.global.size(), where, "textual global");
      for (const auto& a : r.attrs) {
        if (a) check_width(dims.textual, a->size(), where, "textual attribute");
      }
      ds.textual.push_back(std::move(r));
    }
  }
  return ds;
}

Dataset read_dataset(const std::filesystem::path& path, const TextFeaturizer* featurizer) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_dataset(in, path.string(), featurizer);
}

void write_records(std::ostream& out, std::span<const RawRecord> records) {
  for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

std::vector<RawProbeCase> read_probe_cases(const std::filesystem::path& path,
                                           const TextFeaturizer& featurizer) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<RawProbeCase> cases;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const auto j = json::parse(line);
      if (!j.is_object() || !j.contains("text") || !j.contains("target") ||
          !j.contains("distractor")) {
        bad(where, "probe case needs text, target and distractor");
      }
      RawProbeCase c;
      c.target = record_from_json(j["target"], where);
      c.distractor = record_from_json(j["distractor"], where);
      if (c.target.modality != Modality::Visual || c.distractor.modality != Modality::Visual) {
        bad(where, "probe target and distractor must be visual records");
      }
      c.query = featurizer.from_text(c.target.person_id, j["text"].get<std::string>());
      cases.push_back(std::move(c));
    } catch (const json::exception& e) {
      bad(where, e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MalformedInput && std::string_view(e.what()).starts_with(where)) {
        throw;
      }
      bad(where, e.what());
    }
  }
  return cases;
}

void write_probe_cases(std::ostream& out, std::span<const RawProbeCase> cases) {
  for (const auto& c : cases) {
    json j;
    j["text"] = c.query.text.value_or("");
    j["target"] = record_to_json(c.target);
    j["distractor"] = record_to_json(c.distractor);
    out << j.dump() << '\n';
  }
}

}  // namespace attralign
