#ifndef ATTRALIGN_CHECKPOINT_HPP
#define ATTRALIGN_CHECKPOINT_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "attralign/config.hpp"
#include "attralign/encoder.hpp"

namespace attralign {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  TrainConfig config;
  Model model;
  std::vector<int> class_ids;  // classifier row -> person id
  std::size_t epoch = 0;
  std::string rng_state;  // textual mt19937_64 state after `epoch`
};

// JSON container; doubles are written with round-trip precision so a load
// reproduces every parameter bit for bit.
nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace attralign

#endif  // ATTRALIGN_CHECKPOINT_HPP
