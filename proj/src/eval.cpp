#include "attralign/eval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "attralign/error.hpp"

namespace attralign {
namespace {

double safe_cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "query and gallery embeddings differ in dimension");
  }
  if (a.norm() == 0.0 || b.norm() == 0.0) return 0.0;
  return cosine(a, b);
}

std::vector<EmbeddingRecord> embed_all(const Model& model, std::span<const RawRecord> records,
                                       ScoringMode mode) {
  std::vector<EmbeddingRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (mode == ScoringMode::GlobalOnly) {
      RawRecord stripped = r;
      for (auto& a : stripped.attrs) a.reset();
      out.push_back(model.embed(stripped));
    } else {
      out.push_back(model.embed(r));
    }
  }
  return out;
}

}  // namespace

double combined_score(const EmbeddingRecord& query, const EmbeddingRecord& item, double lambda) {
  const double global = safe_cosine(query.global(), item.global());
  if (lambda == 0.0) return global;
  double sum = 0.0;
  std::size_t shared = 0;
  for (AttributeCategory c : kAllCategories) {
    if (query.present(c) && item.present(c)) {
      sum += safe_cosine(query.attr(c), item.attr(c));
      ++shared;
    }
  }
  if (shared == 0) return global;
  return global + lambda * (sum / static_cast<double>(shared));
}

RankingResult rank_by_scores(std::size_t query, std::span<const double> scores) {
  RankingResult r;
  r.query = query;
  r.indices.resize(scores.size());
  std::iota(r.indices.begin(), r.indices.end(), std::size_t{0});
  std::stable_sort(r.indices.begin(), r.indices.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  r.scores.reserve(scores.size());
  for (std::size_t i : r.indices) r.scores.push_back(scores[i]);
  return r;
}

std::vector<RankingResult> rank_gallery(std::span<const EmbeddingRecord> queries,
                                        std::span<const EmbeddingRecord> gallery, double lambda) {
  std::vector<RankingResult> out;
  out.reserve(queries.size());
  std::vector<double> scores(gallery.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      scores[g] = combined_score(queries[q], gallery[g], lambda);
    }
    out.push_back(rank_by_scores(q, scores));
  }
  return out;
}

Relevance identity_relevance(std::span<const EmbeddingRecord> queries,
                             std::span<const EmbeddingRecord> gallery) {
  Relevance rel(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    for (std::size_t g = 0; g < gallery.size(); ++g) {
      if (queries[q].person_id() == gallery[g].person_id()) rel[q].insert(g);
    }
  }
  return rel;
}

double recall_at_k(std::span<const RankingResult> rankings, const Relevance& relevant,
                   std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidParams, "recall_at_k requires k >= 1");
  if (rankings.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : rankings) {
    const auto& rel = relevant.at(r.query);
    const std::size_t limit = std::min(k, r.indices.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (rel.contains(r.indices[i])) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double average_precision(const RankingResult& ranking, const std::set<std::size_t>& relevant) {
  if (relevant.empty()) {
    throw Error(ErrorKind::NoRelevantItems,
                "query " + std::to_string(ranking.query) + " has no relevant gallery items");
  }
  double sum = 0.0;
  std::size_t found = 0;
  for (std::size_t rank = 0; rank < ranking.indices.size(); ++rank) {
    if (relevant.contains(ranking.indices[rank])) {
      ++found;
      sum += static_cast<double>(found) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

double mean_ap(std::span<const RankingResult> rankings, const Relevance& relevant) {
  if (rankings.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rankings) sum += average_precision(r, relevant.at(r.query));
  return sum / static_cast<double>(rankings.size());
}

RetrievalMetrics evaluate_retrieval(const Model& model, const Dataset& split, double lambda,
                                    ScoringMode mode) {
  const auto gallery = embed_all(model, split.visual, mode);
  const auto all_queries = embed_all(model, split.textual, mode);
  std::set<int> gallery_ids;
  for (const auto& g : gallery) gallery_ids.insert(g.person_id());
  std::vector<EmbeddingRecord> queries;
  for (const auto& q : all_queries) {
    if (gallery_ids.contains(q.person_id())) queries.push_back(q);
  }
  RetrievalMetrics m;
  m.queries = queries.size();
  if (queries.empty()) return m;
  const auto rankings = rank_gallery(queries, gallery, mode == ScoringMode::GlobalOnly ? 0.0 : lambda);
  const auto rel = identity_relevance(queries, gallery);
  m.r1 = recall_at_k(rankings, rel, 1);
  m.r5 = recall_at_k(rankings, rel, 5);
  m.r10 = recall_at_k(rankings, rel, 10);
  m.map = mean_ap(rankings, rel);
  return m;
}

AttributeRetrieval attribute_retrieve(std::string_view phrase, std::span<const RawRecord> gallery,
                                      const Model& model, const TextFeaturizer& featurizer,
                                      AttributeCategory category, std::string_view value) {
  const auto parsed = parse_description(phrase, featurizer.resources(), featurizer.theta());
  const auto it = parsed.attributes.find(category);
  if (it == parsed.attributes.end()) {
    throw Error(ErrorKind::PhraseUnassignable, "phrase '" + std::string(phrase) +
                                                   "' does not parse to category " +
                                                   std::string(category_name(category)));
  }
  const EmbeddingVector query = model.embed_text_attribute(featurizer.phrase_features(it->second));

  std::vector<std::size_t> candidates;
  std::vector<double> scores;
  for (std::size_t g = 0; g < gallery.size(); ++g) {
    const auto& raw = gallery[g];
    if (raw.modality != Modality::Visual || !raw.present(category)) continue;
    const auto embedded = model.embed(raw);
    candidates.push_back(g);
    scores.push_back(safe_cosine(query, embedded.attr(category)));
  }

  AttributeRetrieval out;
  const auto local = rank_by_scores(0, scores);
  out.ranking.query = 0;
  out.ranking.scores = local.scores;
  std::set<std::size_t> relevant;
  for (std::size_t i = 0; i < local.indices.size(); ++i) {
    const std::size_t g = candidates[local.indices[i]];
    out.ranking.indices.push_back(g);
    const auto& label = gallery[g].labels[index_of(category)];
    if (label && *label == value) relevant.insert(g);
  }
  out.targets = relevant.size();
  if (out.ranking.indices.empty()) return out;
  out.r1 = relevant.contains(out.ranking.indices.front()) ? 1.0 : 0.0;
  if (!relevant.empty()) out.map = average_precision(out.ranking, relevant);
  return out;
}

EmbeddingRecord global_only(const EmbeddingRecord& record) {
  return EmbeddingRecord(record.person_id(), record.modality(), record.global());
}

double probe_malpositioned(std::span<const ProbeCase> cases, double lambda, std::uint64_t seed) {
  if (cases.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::size_t wins = 0;
  for (const auto& c : cases) {
    const double target = combined_score(c.query, c.target, lambda);
    const double distractor = combined_score(c.query, c.distractor, lambda);
    if (target > distractor || (target == distractor && coin(rng))) ++wins;
  }
  return static_cast<double>(wins) / static_cast<double>(cases.size());
}

double probe_malpositioned(std::span<const RawProbeCase> cases, const Model& model, double lambda,
                           ScoringMode mode, std::uint64_t seed) {
  std::vector<ProbeCase> embedded;
  embedded.reserve(cases.size());
  for (const auto& c : cases) {
    ProbeCase p{model.embed(c.query), model.embed(c.target), model.embed(c.distractor)};
    if (mode == ScoringMode::GlobalOnly) {
      p = ProbeCase{global_only(p.query), global_only(p.target), global_only(p.distractor)};
    }
    embedded.push_back(std::move(p));
  }
  return probe_malpositioned(embedded, mode == ScoringMode::GlobalOnly ? 0.0 : lambda, seed);
}

}  // namespace attralign
