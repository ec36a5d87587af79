#ifndef ATTRALIGN_TEXTPARSE_HPP
#define ATTRALIGN_TEXTPARSE_HPP

// Language stream at desk scale: tokenize a description, chunk candidate
// attribute phrases with a word-class lexicon, embed them as the mean of
// their word vectors and assign each phrase to the attribute category whose
// dictionary anchor is closest in cosine.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "attralign/core.hpp"

namespace attralign {

inline constexpr std::size_t kDefaultWordVectorDim = 300;
inline constexpr double kDefaultAssignThreshold = 0.3;

// Read-only token -> vector map. Lookups lowercase the token; unknown tokens
// get a vector derived from a hash of the token, identical across runs.
class WordVectorStore {
 public:
  WordVectorStore(std::size_t dim, std::unordered_map<std::string, std::vector<double>> vectors);

  // Format: first line "d_w <n>", then "<token> <f1> ... <fn>" per line.
  static WordVectorStore parse(std::istream& in, std::string_view source = "<stream>");
  static WordVectorStore load(const std::filesystem::path& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(std::string_view token) const;
  std::vector<double> lookup(std::string_view token) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// Deterministic out-of-vocabulary vector: N(0, 1/dim) entries seeded from an
// FNV-1a hash of the token.
std::vector<double> fallback_vector(std::string_view token, std::size_t dim);

// Curated word list per category and the anchor (mean word vector) of each.
class AttributeDictionary {
 public:
  using WordLists = std::array<std::vector<std::string>, kNumAttributes>;

  AttributeDictionary(WordLists words, const WordVectorStore& store);

  // Sections "[head] [upper] [lower] [shoes] [bags]", one word per line.
  static WordLists parse(std::istream& in, std::string_view source = "<stream>");
  static AttributeDictionary load(const std::filesystem::path& path, const WordVectorStore& store);

  const std::vector<std::string>& words(AttributeCategory c) const { return words_[index_of(c)]; }
  std::span<const double> anchor(AttributeCategory c) const { return anchors_[index_of(c)]; }

 private:
  WordLists words_;
  std::array<std::vector<double>, kNumAttributes> anchors_;
};

enum class WordClass { Adjective, Noun, Verb, Stop };

// Token -> word class. Tokens missing from the lexicon are noun-like.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::unordered_map<std::string, WordClass> classes);

  // Lines "<token> <adj|noun|verb|stop>".
  static Lexicon parse(std::istream& in, std::string_view source = "<stream>");
  static Lexicon load(const std::filesystem::path& path);

  WordClass classify(std::string_view token) const;

 private:
  std::unordered_map<std::string, WordClass> classes_;
};

struct CategoryAssignment {
  AttributeCategory category;
  double score;
};

struct ParsedPhrase {
  std::vector<std::string> tokens;
  std::optional<AttributeCategory> category;  // absent iff score < threshold
  double score = 0.0;                          // cosine to the best anchor
};

struct ParsedDescription {
  std::vector<std::string> tokens;   // full sentence, feeds the global embedding
  std::vector<ParsedPhrase> phrases;  // every chunk, assigned or not
  std::map<AttributeCategory, std::vector<std::string>> attributes;
};

// Lowercase; apostrophes and hyphens are removed inside words, every other
// ASCII punctuation character separates tokens.
std::vector<std::string> tokenize(std::string_view text);

// Maximal runs of (adjective)* (noun)+. Verbs and stopwords break runs; an
// adjective following a noun starts a new run.
std::vector<std::vector<std::string>> chunk_phrases(std::span<const std::string> tokens,
                                                    const Lexicon& lexicon);

std::vector<double> embed_phrase(std::span<const std::string> phrase, const WordVectorStore& store);

// Argmax cosine over category anchors; ties go to the earlier category.
std::optional<CategoryAssignment> assign_category(std::span<const double> phrase_vec,
                                                  const AttributeDictionary& dict, double theta);

// Store, dictionary and lexicon bundled so they can be loaded from one place.
struct ParserResources {
  WordVectorStore store;
  AttributeDictionary dictionary;
  Lexicon lexicon;

  // Expects wordvecs.txt, attributes.dict and lexicon.txt under `dir`.
  static ParserResources load(const std::filesystem::path& dir);
  static ParserResources load(const std::filesystem::path& wordvecs,
                              const std::filesystem::path& dictionary,
                              const std::filesystem::path& lexicon);
};

// Directory the build was configured with for the shipped resources.
std::filesystem::path default_resource_dir();

ParsedDescription parse_description(std::string_view text, const ParserResources& resources,
                                    double theta = kDefaultAssignThreshold);

}  // namespace attralign

#endif  // ATTRALIGN_TEXTPARSE_HPP
