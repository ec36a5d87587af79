// Exhaustive reference for k-reciprocal sampling. Deliberately shares nothing
// with k_reciprocal_sample beyond the cosine definition: full matrix, full
// sorts in both directions, literal reciprocity predicate.

#include <algorithm>
#include <numeric>

#include "attralign/error.hpp"
#include "attralign/sampler.hpp"

namespace attralign {

SurrogatePositiveSet k_reciprocal_oracle(const SamplerInput& input) {
  if (input.visual.empty() || input.textual.empty()) {
    throw Error(ErrorKind::EmptyPool, "k-reciprocal oracle needs non-empty pools");
  }
  if (input.k == 0) throw Error(ErrorKind::InvalidParams, "k-reciprocal oracle needs k >= 1");

  const std::size_t nv = input.visual.size();
  const std::size_t nt = input.textual.size();
  std::vector<std::vector<double>> sim(nv, std::vector<double>(nt));
  for (std::size_t i = 0; i < nv; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      sim[i][j] = cosine(input.visual[i].vector, input.textual[j].vector);
    }
  }

  auto ranked = [](std::size_t n, auto score) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
    return order;
  };
  auto in_prefix = [&](const std::vector<std::size_t>& order, std::size_t x) {
    const std::size_t limit = std::min(input.k, order.size());
    for (std::size_t r = 0; r < limit; ++r) {
      if (order[r] == x) return true;
    }
    return false;
  };

  std::vector<std::vector<std::size_t>> text_rank_for_visual(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    text_rank_for_visual[i] = ranked(nt, [&](std::size_t j) { return sim[i][j]; });
  }
  std::vector<std::vector<std::size_t>> visual_rank_for_text(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    visual_rank_for_text[j] = ranked(nv, [&](std::size_t i) { return sim[i][j]; });
  }

  SurrogatePositiveSet result;
  for (std::size_t i = 0; i < nv; ++i) {
    auto& positives = result[input.visual[i].index];
    for (std::size_t j = 0; j < nt; ++j) {
      if (in_prefix(text_rank_for_visual[i], j) && in_prefix(visual_rank_for_text[j], i)) {
        positives.insert(input.textual[j].index);
      }
    }
  }
  return result;
}

}  // namespace attralign
