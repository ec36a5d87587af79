#include "attralign/sampler.hpp"

#include <algorithm>
#include <unordered_map>

#include "attralign/error.hpp"

namespace attralign {

namespace {

void validate_sampler_input(const SamplerInput& input) {
  if (input.visual.empty() || input.textual.empty()) {
    throw Error(ErrorKind::EmptyPool, "k-reciprocal sampling needs non-empty pools");
  }
  if (input.k == 0) throw Error(ErrorKind::InvalidParams, "k-reciprocal sampling needs k >= 1");
  for (const auto* pool : {&input.visual, &input.textual}) {
    std::set<std::size_t> seen;
    for (const auto& e : *pool) {
      if (!seen.insert(e.index).second) {
        throw Error(ErrorKind::InvalidParams,
                    "duplicate pool index " + std::to_string(e.index) + " in sampler input");
      }
    }
  }
}

}  // namespace

SurrogatePositiveSet k_reciprocal_sample(const SamplerInput& input) {
  validate_sampler_input(input);
  const std::size_t nv = input.visual.size();
  const std::size_t nt = input.textual.size();

  // Row-major cosine matrix; row i is visual i against every textual item.
  std::vector<double> sims(nv * nt);
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      sims[i * nt + j] = cosine(input.visual[i].vector, input.textual[j].vector);
    }
  }

  // Top-k visual neighbours of every textual item, computed once and reused
  // by each visual query that reaches it.
  std::vector<std::vector<bool>> text_knows_visual(nt, std::vector<bool>(nv, false));
  std::vector<double> column(nv);
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = 0; i < nv; ++i) column[i] = sims[i * nt + j];
    for (std::size_t i : top_k_by_score(column, input.k)) text_knows_visual[j][i] = true;
  }

  SurrogatePositiveSet result;
  for (std::size_t i = 0; i < nv; ++i) {
    auto& positives = result[input.visual[i].index];
    std::span<const double> row(sims.data() + i * nt, nt);
    for (std::size_t j : top_k_by_score(row, input.k)) {
      if (text_knows_visual[j][i]) positives.insert(input.textual[j].index);
    }
  }
  return result;
}

std::vector<PositivePair> build_positive_pairs(std::span<const LabeledIndex> visual,
                                               std::span<const LabeledIndex> textual,
                                               const SurrogatePositiveSet& surrogates) {
  std::map<std::pair<std::size_t, std::size_t>, PairProvenance> pairs;
  for (const auto& v : visual) {
    for (const auto& t : textual) {
      if (v.person_id == t.person_id) pairs[{v.index, t.index}] = PairProvenance::SameIdentity;
    }
  }
  for (const auto& [v, texts] : surrogates) {
    for (std::size_t t : texts) pairs.try_emplace({v, t}, PairProvenance::Surrogate);
  }
  std::vector<PositivePair> out;
  out.reserve(pairs.size());
  for (const auto& [key, provenance] : pairs) out.push_back({key.first, key.second, provenance});
  return out;
}

}  // namespace attralign
