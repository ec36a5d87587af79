#ifndef ATTRALIGN_EVAL_HPP
#define ATTRALIGN_EVAL_HPP

// Retrieval protocol: text queries rank a visual gallery by a fused
// global + attribute cosine score; Recall@K and mAP are computed against
// identity relevance. Also the phrase-level attribute retrieval harness and
// the malpositioned-matching probe.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "attralign/core.hpp"
#include "attralign/dataset.hpp"
#include "attralign/encoder.hpp"

namespace attralign {

struct RankingResult {
  std::size_t query = 0;
  std::vector<std::size_t> indices;  // gallery indices, best first
  std::vector<double> scores;        // non-increasing
};

// Per query, the gallery indices that count as correct.
using Relevance = std::vector<std::set<std::size_t>>;

// cos(globals) + lambda * mean of cos(attrs) over categories present on both
// records; the attribute term is 0 when they share none. Zero-norm vectors
// score 0.
double combined_score(const EmbeddingRecord& query, const EmbeddingRecord& item, double lambda);

// Orders gallery indices by descending score, ties by ascending index.
RankingResult rank_by_scores(std::size_t query, std::span<const double> scores);

std::vector<RankingResult> rank_gallery(std::span<const EmbeddingRecord> queries,
                                        std::span<const EmbeddingRecord> gallery, double lambda);

// Gallery items sharing the query's person id are relevant.
Relevance identity_relevance(std::span<const EmbeddingRecord> queries,
                             std::span<const EmbeddingRecord> gallery);

// Fraction of rankings with a relevant item in the top k.
double recall_at_k(std::span<const RankingResult> rankings, const Relevance& relevant,
                   std::size_t k);

// Precision at each relevant rank, averaged over the query's relevant count.
// Throws NoRelevantItems if the query has none.
double average_precision(const RankingResult& ranking, const std::set<std::size_t>& relevant);
double mean_ap(std::span<const RankingResult> rankings, const Relevance& relevant);

struct RetrievalMetrics {
  double r1 = 0.0;
  double r5 = 0.0;
  double r10 = 0.0;
  double map = 0.0;
  std::size_t queries = 0;
};

enum class ScoringMode { Combined, GlobalOnly };

// Text records of `split` query its visual records. Queries whose identity
// has no gallery item are skipped. GlobalOnly drops the attribute branches
// before scoring.
RetrievalMetrics evaluate_retrieval(const Model& model, const Dataset& split, double lambda,
                                    ScoringMode mode = ScoringMode::Combined);

struct AttributeRetrieval {
  RankingResult ranking;  // indices into the gallery passed in
  std::size_t targets = 0;
  std::optional<double> r1;   // absent when nothing could be ranked
  std::optional<double> map;  // absent when nothing is relevant
};

// Ranks gallery items carrying `category` by cosine between the encoded
// phrase and their visual embedding for that category. Relevant items are
// those labelled `value`. Throws PhraseUnassignable when the phrase does not
// parse to `category`.
AttributeRetrieval attribute_retrieve(std::string_view phrase, std::span<const RawRecord> gallery,
                                      const Model& model, const TextFeaturizer& featurizer,
                                      AttributeCategory category, std::string_view value);

struct ProbeCase {
  EmbeddingRecord query;
  EmbeddingRecord target;
  EmbeddingRecord distractor;
};

// Fraction of cases where the target outscores the distractor; exact ties
// are settled by a fair coin drawn from `seed`.
double probe_malpositioned(std::span<const ProbeCase> cases, double lambda, std::uint64_t seed = 0);
double probe_malpositioned(std::span<const RawProbeCase> cases, const Model& model, double lambda,
                           ScoringMode mode = ScoringMode::Combined, std::uint64_t seed = 0);

// Removes every attribute embedding, leaving the global one.
EmbeddingRecord global_only(const EmbeddingRecord& record);

}  // namespace attralign

#endif  // ATTRALIGN_EVAL_HPP
