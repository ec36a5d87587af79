#include "attralign/textparse.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

#include "attralign/error.hpp"

namespace attralign {
namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void malformed(std::string_view source, std::size_t line, const std::string& why) {
  throw Error(ErrorKind::MalformedInput,
              std::string(source) + ":" + std::to_string(line) + ": " + why);
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

bool is_comment_or_blank(std::string_view line) {
  line = trim(line);
  return line.empty() || line.front() == '#';
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double unit_uniform(std::uint64_t& state) {
  // 53 random bits in (0, 1].
  return (static_cast<double>(splitmix64(state) >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

WordVectorStore::WordVectorStore(std::size_t dim,
                                 std::unordered_map<std::string, std::vector<double>> vectors)
    : dim_(dim), vectors_(std::move(vectors)) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidParams, "word-vector dimension must be positive");
  for (const auto& [token, vec] : vectors_) {
    if (vec.size() != dim_) {
      throw Error(ErrorKind::DimensionMismatch, "word vector for '" + token + "' has dimension " +
                                                    std::to_string(vec.size()));
    }
  }
}

WordVectorStore WordVectorStore::parse(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) malformed(source, 1, "missing 'd_w <n>' header");
  ++line_no;
  const auto header = split_ws(line);
  std::size_t dim = 0;
  if (header.size() != 2 || header[0] != "d_w" ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim).ec !=
          std::errc{} ||
      dim == 0) {
    malformed(source, line_no, "expected header 'd_w <positive integer>'");
  }

  std::unordered_map<std::string, std::vector<double>> vectors;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_ws(line);
    if (fields.size() != dim + 1) {
      malformed(source, line_no,
                "expected token followed by " + std::to_string(dim) + " values, got " +
                    std::to_string(fields.size() - 1));
    }
    std::vector<double> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(vec[i])) {
        malformed(source, line_no, "bad number '" + std::string(f) + "'");
      }
    }
    auto token = lowercase(fields[0]);
    if (!vectors.emplace(token, std::move(vec)).second) {
      malformed(source, line_no, "duplicate token '" + token + "'");
    }
  }
  return WordVectorStore(dim, std::move(vectors));
}

WordVectorStore WordVectorStore::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

bool WordVectorStore::contains(std::string_view token) const {
  return vectors_.contains(lowercase(token));
}

std::vector<double> WordVectorStore::lookup(std::string_view token) const {
  const auto key = lowercase(token);
  if (auto it = vectors_.find(key); it != vectors_.end()) return it->second;
  return fallback_vector(key, dim_);
}

std::vector<double> fallback_vector(std::string_view token, std::size_t dim) {
  std::uint64_t state = fnv1a(token);
  std::vector<double> out(dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; i += 2) {
    // Box-Muller, written out so the stream does not depend on the standard
    // library's distribution implementation.
    const double r = std::sqrt(-2.0 * std::log(unit_uniform(state)));
    const double t = 2.0 * std::numbers::pi * unit_uniform(state);
    out[i] = scale * r * std::cos(t);
    if (i + 1 < dim) out[i + 1] = scale * r * std::sin(t);
  }
  return out;
}

AttributeDictionary::AttributeDictionary(WordLists words, const WordVectorStore& store)
    : words_(std::move(words)) {
  for (AttributeCategory c : kAllCategories) {
    const auto& list = words_[index_of(c)];
    if (list.empty()) {
      throw Error(ErrorKind::InvalidParams,
                  "dictionary category '" + std::string(category_key(c)) + "' has no words");
    }
    anchors_[index_of(c)] = embed_phrase(list, store);
  }
}

AttributeDictionary::WordLists AttributeDictionary::parse(std::istream& in,
                                                          std::string_view source) {
  WordLists lists;
  std::optional<AttributeCategory> current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto text = trim(line);
    if (text.front() == '[') {
      if (text.back() != ']') malformed(source, line_no, "unterminated section header");
      current = parse_category(text.substr(1, text.size() - 2));
      if (!current || text.substr(1, text.size() - 2) != category_key(*current)) {
        malformed(source, line_no, "unknown section " + std::string(text));
      }
      continue;
    }
    if (!current) malformed(source, line_no, "word outside of a section");
    if (split_ws(text).size() != 1) malformed(source, line_no, "expected one word per line");
    lists[index_of(*current)].push_back(lowercase(text));
  }
  return lists;
}

AttributeDictionary AttributeDictionary::load(const std::filesystem::path& path,
                                              const WordVectorStore& store) {
  auto in = open_or_throw(path);
  return AttributeDictionary(parse(in, path.string()), store);
}

Lexicon::Lexicon(std::unordered_map<std::string, WordClass> classes)
    : classes_(std::move(classes)) {}

Lexicon Lexicon::parse(std::istream& in, std::string_view source) {
  std::unordered_map<std::string, WordClass> classes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const auto fields = split_ws(line);
    if (fields.size() != 2) malformed(source, line_no, "expected '<token> <class>'");
    WordClass cls;
    if (fields[1] == "adj") {
      cls = WordClass::Adjective;
    } else if (fields[1] == "noun") {
      cls = WordClass::Noun;
    } else if (fields[1] == "verb") {
      cls = WordClass::Verb;
    } else if (fields[1] == "stop") {
      cls = WordClass::Stop;
    } else {
      malformed(source, line_no, "unknown word class '" + std::string(fields[1]) + "'");
    }
    classes[lowercase(fields[0])] = cls;
  }
  return Lexicon(std::move(classes));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

WordClass Lexicon::classify(std::string_view token) const {
  if (auto it = classes_.find(lowercase(token)); it != classes_.end()) return it->second;
  return WordClass::Noun;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char raw : text) {
    const auto ch = static_cast<unsigned char>(raw);
    if (std::isspace(ch)) {
      flush();
    } else if (ch == '\'' || ch == '-') {
      continue;
    } else if (std::ispunct(ch)) {
      flush();
    } else {
      current.push_back(static_cast<char>(std::tolower(ch)));
    }
  }
  flush();
  return tokens;
}

std::vector<std::vector<std::string>> chunk_phrases(std::span<const std::string> tokens,
                                                    const Lexicon& lexicon) {
  std::vector<std::vector<std::string>> chunks;
  std::vector<std::string> run;
  bool seen_noun = false;
  auto close = [&] {
    if (seen_noun) chunks.push_back(run);
    run.clear();
    seen_noun = false;
  };
  for (const auto& token : tokens) {
    switch (lexicon.classify(token)) {
      case WordClass::Adjective:
        if (seen_noun) close();
        run.push_back(token);
        break;
      case WordClass::Noun:
        run.push_back(token);
        seen_noun = true;
        break;
      case WordClass::Verb:
      case WordClass::Stop:
        close();
        break;
    }
  }
  close();
  return chunks;
}

std::vector<double> embed_phrase(std::span<const std::string> phrase, const WordVectorStore& store) {
  if (phrase.empty()) throw Error(ErrorKind::EmptyPhrase, "cannot embed an empty phrase");
  std::vector<double> sum(store.dim(), 0.0);
  for (const auto& token : phrase) {
    const auto vec = store.lookup(token);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += vec[i];
  }
  for (double& v : sum) v /= static_cast<double>(phrase.size());
  return sum;
}

std::optional<CategoryAssignment> assign_category(std::span<const double> phrase_vec,
                                                  const AttributeDictionary& dict, double theta) {
  std::optional<CategoryAssignment> best;
  for (AttributeCategory c : kAllCategories) {
    double score = 0.0;
    const auto anchor = dict.anchor(c);
    if (anchor.size() != phrase_vec.size()) {
      throw Error(ErrorKind::DimensionMismatch, "phrase vector and anchor dimensions differ");
    }
    // A zero phrase vector scores 0 against every anchor.
    if (std::any_of(phrase_vec.begin(), phrase_vec.end(), [](double v) { return v != 0.0; })) {
      score = cosine(phrase_vec, anchor);
    }
    if (!best || score > best->score) best = CategoryAssignment{c, score};
  }
  if (!best || best->score < theta) return std::nullopt;
  return best;
}

ParserResources ParserResources::load(const std::filesystem::path& dir) {
  return load(dir / "wordvecs.txt", dir / "attributes.dict", dir / "lexicon.txt");
}

ParserResources ParserResources::load(const std::filesystem::path& wordvecs,
                                      const std::filesystem::path& dictionary,
                                      const std::filesystem::path& lexicon) {
  auto store = WordVectorStore::load(wordvecs);
  auto dict = AttributeDictionary::load(dictionary, store);
  return ParserResources{std::move(store), std::move(dict), Lexicon::load(lexicon)};
}

std::filesystem::path default_resource_dir() { return ATTRALIGN_DATA_DIR; }

ParsedDescription parse_description(std::string_view text, const ParserResources& resources,
                                    double theta) {
  ParsedDescription out;
  out.tokens = tokenize(text);
  for (auto& chunk : chunk_phrases(out.tokens, resources.lexicon)) {
    ParsedPhrase phrase;
    const auto vec = embed_phrase(chunk, resources.store);
    double best_score = 0.0;
    if (auto hit = assign_category(vec, resources.dictionary, theta)) {
      phrase.category = hit->category;
      best_score = hit->score;
      auto& slot = out.attributes[hit->category];
      slot.insert(slot.end(), chunk.begin(), chunk.end());
    } else if (auto any = assign_category(vec, resources.dictionary, -2.0)) {
      best_score = any->score;
    }
    phrase.tokens = std::move(chunk);
    phrase.score = best_score;
    out.phrases.push_back(std::move(phrase));
  }
  return out;
}

}  // namespace attralign
