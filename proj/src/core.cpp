#include "attralign/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "attralign/error.hpp"

namespace attralign {

std::string_view category_key(AttributeCategory c) {
  switch (c) {
    case AttributeCategory::Head: return "head";
    case AttributeCategory::UpperBody: return "upper";
    case AttributeCategory::LowerBody: return "lower";
    case AttributeCategory::Shoes: return "shoes";
    case AttributeCategory::Bags: return "bags";
  }
  return "?";
}

std::string_view category_name(AttributeCategory c) {
  switch (c) {
    case AttributeCategory::Head: return "Head";
    case AttributeCategory::UpperBody: return "UpperBody";
    case AttributeCategory::LowerBody: return "LowerBody";
    case AttributeCategory::Shoes: return "Shoes";
    case AttributeCategory::Bags: return "Bags";
  }
  return "?";
}

std::optional<AttributeCategory> parse_category(std::string_view text) {
  for (AttributeCategory c : kAllCategories) {
    if (text == category_key(c) || text == category_name(c)) return c;
  }
  return std::nullopt;
}

std::string_view modality_name(Modality m) {
  return m == Modality::Visual ? "visual" : "textual";
}

std::optional<Modality> parse_modality(std::string_view text) {
  if (text == "visual") return Modality::Visual;
  if (text == "textual") return Modality::Textual;
  return std::nullopt;
}

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding vector must have positive dimension");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidParams, "embedding vector contains a non-finite entry");
    }
  }
}

double EmbeddingVector::norm() const {
  return std::sqrt(std::inner_product(values_.begin(), values_.end(), values_.begin(), 0.0));
}

EmbeddingRecord::EmbeddingRecord(int person_id, Modality modality, EmbeddingVector global,
                                 AttributeSlots attrs)
    : person_id_(person_id), modality_(modality), global_(std::move(global)),
      attrs_(std::move(attrs)) {
  for (const auto& slot : attrs_) {
    if (slot && slot->dim() != global_.dim()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "attribute embedding dimension " + std::to_string(slot->dim()) +
                      " differs from global dimension " + std::to_string(global_.dim()));
    }
  }
}

const EmbeddingVector& EmbeddingRecord::attr(AttributeCategory c) const {
  const auto& slot = attrs_[index_of(c)];
  if (!slot) {
    throw Error(ErrorKind::InvalidParams,
                "attribute " + std::string(category_key(c)) + " is absent on this record");
  }
  return *slot;
}

AlignmentParams::AlignmentParams(double alpha, double beta, double margin, double tau_p,
                                 double tau_n)
    : alpha_(alpha), beta_(beta), margin_(margin), tau_p_(tau_p), tau_n_(tau_n) {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidParams, why); };
  if (!(margin > 0.0 && margin < alpha && alpha <= 1.0)) fail("require 0 < m < alpha <= 1");
  if (!(tau_p > 0.0) || !(tau_n > 0.0)) fail("temperatures must be positive");
  if (!std::isfinite(beta) || std::abs(beta - (alpha - margin)) > kBetaTolerance) {
    fail("beta must equal alpha - m");
  }
}

AlignmentParams AlignmentParams::from_margin(double alpha, double margin, double tau_p,
                                             double tau_n) {
  return AlignmentParams(alpha, alpha - margin, margin, tau_p, tau_n);
}

AlignmentParams AlignmentParams::defaults() { return AlignmentParams(0.6, 0.4, 0.2, 10.0, 40.0); }

double cosine(std::span<const double> a, std::span<const double> b, ZeroNormPolicy policy) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "cosine of vectors with dimensions " +
                                                  std::to_string(a.size()) + " and " +
                                                  std::to_string(b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    if (policy == ZeroNormPolicy::Strict) {
      throw Error(ErrorKind::ZeroNormVector, "cosine of a zero-norm vector");
    }
    warn("cosine of a zero-norm vector scored as 0");
    return 0.0;
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b, ZeroNormPolicy policy) {
  return cosine(a.values(), b.values(), policy);
}

EmbeddingVector l2_normalize(const EmbeddingVector& a) {
  const double n = a.norm();
  if (n == 0.0) throw Error(ErrorKind::ZeroNormVector, "cannot normalize a zero-norm vector");
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v /= n;
  EmbeddingVector result(std::move(out));
  result.normalized_ = true;
  return result;
}

std::vector<std::size_t> top_k_by_score(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  auto better = [&](std::size_t i, std::size_t j) {
    if (scores[i] != scores[j]) return scores[i] > scores[j];
    return i < j;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    better);
  order.resize(take);
  return order;
}

std::vector<std::size_t> top_k(const EmbeddingVector& query, std::span<const EmbeddingVector> pool,
                               std::size_t k, ZeroNormPolicy policy) {
  if (pool.empty()) throw Error(ErrorKind::EmptyPool, "top_k over an empty pool");
  if (k == 0) throw Error(ErrorKind::InvalidParams, "top_k requires k >= 1");
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& item : pool) scores.push_back(cosine(query, item, policy));
  return top_k_by_score(scores, k);
}

}  // namespace attralign
