#include "attralign/checkpoint.hpp"

#include <fstream>

#include "attralign/error.hpp"

namespace attralign {
namespace {

nlohmann::json shape_to_json(const ModelShape& s) {
  return {{"visual_global_in", s.visual_global_in},
          {"visual_attr_in", s.visual_attr_in},
          {"textual_in", s.textual_in},
          {"dim", s.dim},
          {"hidden", s.hidden},
          {"num_classes", s.num_classes},
          {"grid_height", s.grid_height},
          {"grid_width", s.grid_width},
          {"normalize_embeddings", s.normalize_embeddings}};
}

ModelShape shape_from_json(const nlohmann::json& j) {
  ModelShape s;
  s.visual_global_in = j.at("visual_global_in").get<std::size_t>();
  s.visual_attr_in = j.at("visual_attr_in").get<std::size_t>();
  s.textual_in = j.at("textual_in").get<std::size_t>();
  s.dim = j.at("dim").get<std::size_t>();
  s.hidden = j.at("hidden").get<std::size_t>();
  s.num_classes = j.at("num_classes").get<std::size_t>();
  s.grid_height = j.at("grid_height").get<std::size_t>();
  s.grid_width = j.at("grid_width").get<std::size_t>();
  s.normalize_embeddings = j.at("normalize_embeddings").get<bool>();
  return s;
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& b : ckpt.model.parameter_blocks()) {
    params[b.name] = std::vector<double>(b.data, b.data + b.size);
  }
  return {{"format_version", kCheckpointFormatVersion},
          {"config", config_to_json(ckpt.config)},
          {"shape", shape_to_json(ckpt.model.shape())},
          {"epoch", ckpt.epoch},
          {"rng_state", ckpt.rng_state},
          {"class_ids", ckpt.class_ids},
          {"params", params}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw Error(ErrorKind::MalformedInput,
                  "unsupported checkpoint format_version " + std::to_string(version));
    }
    Checkpoint ckpt;
    ckpt.config = config_from_json(j.at("config"));
    ckpt.model = Model(shape_from_json(j.at("shape")));
    ckpt.epoch = j.at("epoch").get<std::size_t>();
    ckpt.rng_state = j.at("rng_state").get<std::string>();
    ckpt.class_ids = j.at("class_ids").get<std::vector<int>>();
    const auto& params = j.at("params");
    std::size_t seen = 0;
    for (auto& b : ckpt.model.parameter_blocks()) {
      const auto values = params.at(b.name).get<std::vector<double>>();
      if (values.size() != b.size) {
        throw Error(ErrorKind::MalformedInput, "parameter " + b.name + " has " +
                                                   std::to_string(values.size()) +
                                                   " values, expected " + std::to_string(b.size));
      }
      std::copy(values.begin(), values.end(), b.data);
      ++seen;
    }
    if (seen != params.size()) {
      throw Error(ErrorKind::MalformedInput, "checkpoint holds unknown parameter blocks");
    }
    if (ckpt.class_ids.size() != ckpt.model.shape().num_classes) {
      throw Error(ErrorKind::MalformedInput, "class_ids does not match the classifier width");
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << checkpoint_to_json(ckpt).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedInput, path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace attralign
