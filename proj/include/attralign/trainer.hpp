#ifndef ATTRALIGN_TRAINER_HPP
#define ATTRALIGN_TRAINER_HPP

// Joint training of the toy encoders: identity classification, per-cell
// segmentation, global alignment and attribute alignment with surrogate
// positives mined per batch.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attralign/checkpoint.hpp"
#include "attralign/config.hpp"
#include "attralign/dataset.hpp"
#include "attralign/encoder.hpp"
#include "attralign/losses.hpp"
#include "attralign/sampler.hpp"

namespace attralign {

// Person id -> identity-classifier row, in ascending id order.
class IdentityIndex {
 public:
  IdentityIndex() = default;
  explicit IdentityIndex(std::vector<int> class_ids);
  static IdentityIndex from_records(std::span<const RawRecord> records);

  std::optional<std::size_t> class_of(int person_id) const;
  std::size_t size() const { return ids_.size(); }
  const std::vector<int>& ids() const { return ids_; }

 private:
  std::vector<int> ids_;
  std::map<int, std::size_t> rows_;
};

// Visual and textual records of one mini-batch. Row i of either side is
// addressed by its position here.
struct Batch {
  std::vector<RawRecord> visual;
  std::vector<RawRecord> textual;
};

using RowPair = std::pair<std::size_t, std::size_t>;  // (visual row, textual row)

struct CategoryPlan {
  std::vector<PositivePair> positives;
  std::vector<RowPair> negatives;
};

struct PairPlan {
  std::vector<RowPair> global_positives;
  std::vector<RowPair> global_negatives;
  std::array<CategoryPlan, kNumAttributes> categories;

  std::size_t surrogate_count() const;
};

struct LossBreakdown {
  LossTerms terms;
  double total = 0.0;
};

// Encodes the batch and mines pairs: same-identity pairs are global
// positives, every cross-identity pair a global negative; per category the
// positives are same-identity plus k-reciprocal surrogates and the negatives
// every remaining cross-identity pair. Throws DegenerateBatch when the batch
// holds a single identity.
PairPlan plan_pairs(const Model& model, const Batch& batch, std::size_t k);

// Joint loss of the batch for a fixed pair plan. When `grad` is given the
// parameter gradient of `total` is accumulated into it.
LossBreakdown batch_loss(const Model& model, const Batch& batch, const PairPlan& plan,
                         const TrainConfig& config, const IdentityIndex& ids,
                         Model* grad = nullptr);

// plan_pairs + batch_loss + one Adam update at learning rate `lr`.
LossBreakdown train_step(const Batch& batch, Model& model, Adam& optimizer,
                         const TrainConfig& config, const IdentityIndex& ids, double lr);

// Shuffles the visual records and pairs each with a random description of
// the same person. Records of people without any description are dropped;
// batches with a single identity are skipped.
std::vector<Batch> make_batches(const Dataset& train, std::size_t batch_size, std::mt19937_64& rng);

ModelShape model_shape(const Dataset& train, const TrainConfig& config, std::size_t num_classes);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss_id = 0.0;
  double loss_seg = 0.0;
  double loss_align_glo = 0.0;
  double loss_align_attr = 0.0;
  double val_r1 = 0.0;

  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct FitResult {
  Checkpoint best;
  std::vector<EpochMetrics> log;
};

// Randomly initialised checkpoint for `train` under `config`.
Checkpoint initial_checkpoint(const Dataset& train, const TrainConfig& config);

// Trains for config.epochs, decaying the learning rate once at
// lr_decay_epoch, and returns the checkpoint with the best validation
// Recall@1 (earliest on ties).
FitResult fit(const Dataset& train, const Dataset& val, const TrainConfig& config,
              const std::function<void(const EpochMetrics&)>& on_epoch = {});

std::string metrics_csv(std::span<const EpochMetrics> log);

std::string rng_to_string(const std::mt19937_64& rng);
std::mt19937_64 rng_from_string(const std::string& state);

}  // namespace attralign

#endif  // ATTRALIGN_TRAINER_HPP
