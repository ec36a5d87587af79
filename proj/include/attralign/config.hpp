#ifndef ATTRALIGN_CONFIG_HPP
#define ATTRALIGN_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "attralign/core.hpp"
#include "attralign/encoder.hpp"
#include "attralign/losses.hpp"
#include "attralign/sampler.hpp"
#include "attralign/textparse.hpp"

namespace attralign {

// Training configuration. Field names match the JSON config document (see
// docs/formats.md); defaults follow the reference training recipe.
struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t epochs = 70;
  double lr = 2e-4;
  double weight_decay = 4e-5;
  double lr_decay_factor = 0.1;
  std::size_t lr_decay_epoch = 40;  // 0 disables the decay
  std::uint64_t seed = 0;
  AlignmentParams alignment = AlignmentParams::defaults();
  std::size_t k = kDefaultReciprocalK;
  double theta = kDefaultAssignThreshold;
  LossWeights loss_weights;
  bool deterministic = true;
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  std::size_t hidden_dim = 0;
  bool normalize_embeddings = false;
  bool text_id_loss = false;
  double eval_lambda = 1.0;  // fusion weight used for per-epoch validation
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::string resources;  // parser resource directory; empty = shipped data

  void validate() const;  // throws InvalidParams
  AdamSettings adam() const { return {adam_beta1, adam_beta2, adam_eps, weight_decay}; }
  std::filesystem::path resource_dir() const;
};

// Fields present in `j` override `base`; unknown fields are rejected.
TrainConfig config_from_json(const nlohmann::json& j, TrainConfig base = {});
nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace attralign

#endif  // ATTRALIGN_CONFIG_HPP
