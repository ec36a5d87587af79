#ifndef ATTRALIGN_LOSSES_HPP
#define ATTRALIGN_LOSSES_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "attralign/core.hpp"

namespace attralign {

// Cosine similarities of the positive and negative pairs in one alignment
// term. Entries must be finite and within [-1, 1].
struct PairSimilarities {
  std::vector<double> positives;
  std::vector<double> negatives;
};

struct AlignmentGradient {
  std::vector<double> positives;
  std::vector<double> negatives;
};

// log(1 + exp(x)) without overflow for large x.
double softplus(double x);
// 1 / (1 + exp(-x)) without overflow.
double logistic(double x);

// Bounded logistic alignment loss:
//   mean_pos log(1 + exp(-tau_p (S+ - alpha))) + mean_neg log(1 + exp(tau_n (S- - beta)))
// Positives and negatives are each averaged over their own count; an empty
// side contributes 0. Throws EmptyBatch when both sides are empty.
double align_loss(const PairSimilarities& sims, const AlignmentParams& params);

// d align_loss / dS for every entry, with the same per-side averaging.
AlignmentGradient align_loss_grad(const PairSimilarities& sims, const AlignmentParams& params);

struct LossWithGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

// Softmax cross-entropy of one logit row; gradient is softmax - onehot.
LossWithGradient id_loss(std::span<const double> logits, std::size_t target);

inline constexpr std::size_t kSegClasses = kNumAttributes + 1;  // background + 5 attributes

// Per-pixel logits over background and the five attribute classes, with one
// integer label per pixel. Logits are stored row-major as [h][w][class].
struct SegGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> logits;
  std::vector<int> labels;
};

// Mean over pixels of the softmax cross-entropy; gradient has the layout of
// `logits`.
LossWithGradient seg_loss(const SegGrid& grid);

// Objective terms of one batch. Absent terms contribute nothing.
struct LossTerms {
  std::optional<double> id;
  std::optional<double> seg;
  std::optional<double> align_global;
  std::optional<double> align_attr;
};

struct LossWeights {
  double id = 1.0;
  double seg = 1.0;
  double align_global = 1.0;
  double align_attr = 1.0;
};

double joint_loss(const LossTerms& terms, const LossWeights& weights = {});

// Mean of the per-category alignment losses that exist; nullopt if none do.
std::optional<double> mean_attribute_loss(std::span<const std::optional<double>> per_category);

}  // namespace attralign

#endif  // ATTRALIGN_LOSSES_HPP
