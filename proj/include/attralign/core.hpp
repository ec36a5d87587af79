#ifndef ATTRALIGN_CORE_HPP
#define ATTRALIGN_CORE_HPP

// Domain types shared by every module plus the elementary vector operations
// (cosine scoring, L2 normalization, deterministic top-k).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace attralign {

// The five aligned attribute slots. The global slot is not a category; it is
// carried separately on every record.
enum class AttributeCategory : std::uint8_t { Head, UpperBody, LowerBody, Shoes, Bags };

inline constexpr std::size_t kNumAttributes = 5;
inline constexpr std::array<AttributeCategory, kNumAttributes> kAllCategories = {
    AttributeCategory::Head, AttributeCategory::UpperBody, AttributeCategory::LowerBody,
    AttributeCategory::Shoes, AttributeCategory::Bags};

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

constexpr std::size_t index_of(AttributeCategory c) { return static_cast<std::size_t>(c); }

// Short key used in files: head, upper, lower, shoes, bags.
std::string_view category_key(AttributeCategory c);
// Human-readable name: Head, UpperBody, LowerBody, Shoes, Bags.
std::string_view category_name(AttributeCategory c);
// Accepts either spelling, case-sensitive.
std::optional<AttributeCategory> parse_category(std::string_view text);

enum class Modality : std::uint8_t { Visual, Textual };

std::string_view modality_name(Modality m);
std::optional<Modality> parse_modality(std::string_view text);

// A finite, non-empty real vector. The normalized flag is only ever set by
// l2_normalize, so a flagged vector always has unit norm within 1e-6.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  bool is_normalized() const { return normalized_; }
  double norm() const;

  friend bool operator==(const EmbeddingVector& a, const EmbeddingVector& b) {
    return a.values_ == b.values_;
  }

 private:
  friend EmbeddingVector l2_normalize(const EmbeddingVector& a);

  std::vector<double> values_;
  bool normalized_ = false;
};

using AttributeSlots = std::array<std::optional<EmbeddingVector>, kNumAttributes>;

// Global embedding plus the attribute embeddings that are present. Immutable
// once built; the presence mask is derived from the optional slots so the two
// cannot disagree.
class EmbeddingRecord {
 public:
  EmbeddingRecord(int person_id, Modality modality, EmbeddingVector global,
                  AttributeSlots attrs = {});

  int person_id() const { return person_id_; }
  Modality modality() const { return modality_; }
  const EmbeddingVector& global() const { return global_; }
  bool present(AttributeCategory c) const { return attrs_[index_of(c)].has_value(); }
  const EmbeddingVector& attr(AttributeCategory c) const;
  const AttributeSlots& attrs() const { return attrs_; }
  std::size_t dim() const { return global_.dim(); }

 private:
  int person_id_;
  Modality modality_;
  EmbeddingVector global_;
  AttributeSlots attrs_;
};

// Hyperparameters of the bounded logistic alignment loss. Construction
// enforces beta = alpha - m, 0 < m < alpha <= 1 and positive temperatures.
class AlignmentParams {
 public:
  static constexpr double kBetaTolerance = 1e-12;

  AlignmentParams(double alpha, double beta, double margin, double tau_p, double tau_n);
  // Derives beta from alpha and the margin.
  static AlignmentParams from_margin(double alpha, double margin, double tau_p, double tau_n);
  // alpha=0.6, beta=0.4, m=0.2, tau_p=10, tau_n=40.
  static AlignmentParams defaults();

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double margin() const { return margin_; }
  double tau_p() const { return tau_p_; }
  double tau_n() const { return tau_n_; }

 private:
  double alpha_;
  double beta_;
  double margin_;
  double tau_p_;
  double tau_n_;
};

enum class ZeroNormPolicy { Strict, Lenient };

// a.b / (|a||b|), clamped to [-1, 1]. Strict mode throws ZeroNormVector on a
// zero vector; lenient mode warns and returns 0.
double cosine(std::span<const double> a, std::span<const double> b,
              ZeroNormPolicy policy = ZeroNormPolicy::Strict);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b,
              ZeroNormPolicy policy = ZeroNormPolicy::Strict);

EmbeddingVector l2_normalize(const EmbeddingVector& a);

// Indices of the min(k, n) largest scores, descending, ties by ascending index.
std::vector<std::size_t> top_k_by_score(std::span<const double> scores, std::size_t k);

// Pool indices ordered by descending cosine to the query (same tie-break).
std::vector<std::size_t> top_k(const EmbeddingVector& query, std::span<const EmbeddingVector> pool,
                               std::size_t k, ZeroNormPolicy policy = ZeroNormPolicy::Strict);

}  // namespace attralign

#endif  // ATTRALIGN_CORE_HPP
