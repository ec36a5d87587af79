#include "attralign/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attralign/error.hpp"

namespace attralign {
namespace {

void check_similarities(const PairSimilarities& sims) {
  if (sims.positives.empty() && sims.negatives.empty()) {
    throw Error(ErrorKind::EmptyBatch, "alignment loss needs at least one pair");
  }
  auto valid = [](double s) { return std::isfinite(s) && s >= -1.0 && s <= 1.0; };
  if (!std::all_of(sims.positives.begin(), sims.positives.end(), valid) ||
      !std::all_of(sims.negatives.begin(), sims.negatives.end(), valid)) {
    throw Error(ErrorKind::InvalidParams, "pair similarities must be finite and within [-1, 1]");
  }
}

// Numerically stable log-sum-exp based cross entropy over one row.
double softmax_xent(std::span<const double> logits, std::size_t target, double* grad) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z - top);
  const double log_denom = std::log(denom);
  if (grad != nullptr) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      grad[i] = std::exp(logits[i] - top - log_denom) - (i == target ? 1.0 : 0.0);
    }
  }
  return log_denom - (logits[target] - top);
}

}  // namespace

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double align_loss(const PairSimilarities& sims, const AlignmentParams& params) {
  check_similarities(sims);
  double pos = 0.0;
  for (double s : sims.positives) pos += softplus(-params.tau_p() * (s - params.alpha()));
  double neg = 0.0;
  for (double s : sims.negatives) neg += softplus(params.tau_n() * (s - params.beta()));
  double loss = 0.0;
  if (!sims.positives.empty()) loss += pos / static_cast<double>(sims.positives.size());
  if (!sims.negatives.empty()) loss += neg / static_cast<double>(sims.negatives.size());
  return loss;
}

AlignmentGradient align_loss_grad(const PairSimilarities& sims, const AlignmentParams& params) {
  check_similarities(sims);
  AlignmentGradient g;
  const double n_pos = static_cast<double>(sims.positives.size());
  const double n_neg = static_cast<double>(sims.negatives.size());
  g.positives.reserve(sims.positives.size());
  for (double s : sims.positives) {
    // -tau_p / (1 + exp(tau_p (S+ - alpha)))
    g.positives.push_back(-params.tau_p() * logistic(-params.tau_p() * (s - params.alpha())) /
                          n_pos);
  }
  g.negatives.reserve(sims.negatives.size());
  for (double s : sims.negatives) {
    // tau_n / (1 + exp(tau_n (beta - S-)))
    g.negatives.push_back(params.tau_n() * logistic(params.tau_n() * (s - params.beta())) / n_neg);
  }
  return g;
}

LossWithGradient id_loss(std::span<const double> logits, std::size_t target) {
  if (target >= logits.size()) {
    throw Error(ErrorKind::TargetOutOfRange, "identity target " + std::to_string(target) +
                                                 " outside " + std::to_string(logits.size()) +
                                                 " classes");
  }
  LossWithGradient out;
  out.grad.resize(logits.size());
  out.loss = softmax_xent(logits, target, out.grad.data());
  return out;
}

LossWithGradient seg_loss(const SegGrid& grid) {
  const std::size_t pixels = grid.height * grid.width;
  if (pixels == 0 || grid.labels.size() != pixels || grid.logits.size() != pixels * kSegClasses) {
    throw Error(ErrorKind::ShapeMismatch, "segmentation grid shape is inconsistent");
  }
  LossWithGradient out;
  out.grad.resize(grid.logits.size());
  const double inv = 1.0 / static_cast<double>(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    const int label = grid.labels[p];
    if (label < 0 || static_cast<std::size_t>(label) >= kSegClasses) {
      throw Error(ErrorKind::ShapeMismatch, "segmentation label out of range");
    }
    std::span<const double> row(grid.logits.data() + p * kSegClasses, kSegClasses);
    double* g = out.grad.data() + p * kSegClasses;
    out.loss += softmax_xent(row, static_cast<std::size_t>(label), g);
    for (std::size_t k = 0; k < kSegClasses; ++k) g[k] *= inv;
  }
  out.loss *= inv;
  return out;
}

double joint_loss(const LossTerms& terms, const LossWeights& weights) {
  return weights.id * terms.id.value_or(0.0) + weights.seg * terms.seg.value_or(0.0) +
         weights.align_global * terms.align_global.value_or(0.0) +
         weights.align_attr * terms.align_attr.value_or(0.0);
}

std::optional<double> mean_attribute_loss(std::span<const std::optional<double>> per_category) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : per_category) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace attralign
