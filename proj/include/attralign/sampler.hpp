#ifndef ATTRALIGN_SAMPLER_HPP
#define ATTRALIGN_SAMPLER_HPP

// K-reciprocal mining of surrogate positive cross-modal pairs for one
// attribute category, plus an exhaustive reference implementation used to
// check it.

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "attralign/core.hpp"

namespace attralign {

inline constexpr std::size_t kDefaultReciprocalK = 8;

struct IndexedEmbedding {
  std::size_t index;
  EmbeddingVector vector;
};

// Items whose attribute is absent must be left out by the caller.
struct SamplerInput {
  std::vector<IndexedEmbedding> visual;
  std::vector<IndexedEmbedding> textual;
  std::size_t k = kDefaultReciprocalK;
};

// Visual index -> textual indices that are mutual top-k neighbours. Every
// visual index of the input appears as a key, possibly with an empty set.
using SurrogatePositiveSet = std::map<std::size_t, std::set<std::size_t>>;

SurrogatePositiveSet k_reciprocal_sample(const SamplerInput& input);

// Same contract, computed from the full cosine matrix with complete sorts in
// both directions. Intended for pools of at most a few hundred items.
SurrogatePositiveSet k_reciprocal_oracle(const SamplerInput& input);

enum class PairProvenance { SameIdentity, Surrogate };

struct LabeledIndex {
  std::size_t index;
  int person_id;
};

struct PositivePair {
  std::size_t visual;
  std::size_t textual;
  PairProvenance provenance;

  friend bool operator==(const PositivePair&, const PositivePair&) = default;
};

// Union of every same-identity cross-modal pair and every surrogate pair,
// sorted by (visual, textual). A surrogate that is also a same-identity pair
// is reported once, as SameIdentity.
std::vector<PositivePair> build_positive_pairs(std::span<const LabeledIndex> visual,
                                               std::span<const LabeledIndex> textual,
                                               const SurrogatePositiveSet& surrogates);

}  // namespace attralign

#endif  // ATTRALIGN_SAMPLER_HPP
