#include <doctest.h>

#include <cmath>
#include <sstream>

#include "attralign/error.hpp"
#include "attralign/textparse.hpp"

using namespace attralign;

namespace {

const ParserResources& shipped() {
  static const ParserResources r = ParserResources::load(default_resource_dir());
  return r;
}

using Tokens = std::vector<std::string>;

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("A girl in White shirt.") == Tokens{"a", "girl", "in", "white", "shirt"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("black skirt, tan pants") == Tokens{"black", "skirt", "tan", "pants"});
  CHECK(tokenize("a t-shirt; man's hat") == Tokens{"a", "tshirt", "mans", "hat"});
  CHECK(tokenize("  \t\n ").empty());
}

TEST_CASE("chunk_phrases") {
  const Lexicon& lex = shipped().lexicon;
  CHECK(chunk_phrases(Tokens{"white", "shirt", "and", "black", "skirt"}, lex) ==
        std::vector<Tokens>{{"white", "shirt"}, {"black", "skirt"}});
  CHECK(chunk_phrases(Tokens{"walking"}, lex).empty());
  CHECK(chunk_phrases(Tokens{"backpack"}, lex) == std::vector<Tokens>{{"backpack"}});
  // An adjective after a noun starts a new run; dangling adjectives are dropped.
  CHECK(chunk_phrases(Tokens{"shirt", "black", "pants", "red"}, lex) ==
        std::vector<Tokens>{{"shirt"}, {"black", "pants"}});
  // Unknown tokens are noun-like.
  CHECK(chunk_phrases(Tokens{"red", "zorblax"}, lex) == std::vector<Tokens>{{"red", "zorblax"}});
}

TEST_CASE("embed_phrase") {
  std::unordered_map<std::string, std::vector<double>> m{{"x", {1, 0}}, {"y", {0, 1}}};
  const WordVectorStore store(2, m);
  CHECK(embed_phrase(Tokens{"x"}, store) == std::vector<double>{1, 0});
  CHECK(embed_phrase(Tokens{"x", "x"}, store) == std::vector<double>{1, 0});
  CHECK(embed_phrase(Tokens{"x", "y"}, store) == std::vector<double>{0.5, 0.5});
  CHECK(embed_phrase(Tokens{"X"}, store) == std::vector<double>{1, 0});
  CHECK_THROWS_AS(embed_phrase(Tokens{}, store), Error);
}

TEST_CASE("out-of-vocabulary fallback is deterministic") {
  const auto a = fallback_vector("zorblax", 300);
  CHECK(a == fallback_vector("zorblax", 300));
  CHECK(a != fallback_vector("zorblaxx", 300));
  CHECK(shipped().store.lookup("Zorblax") == shipped().store.lookup("zorblax"));
  double sq = 0.0;
  for (double v : a) sq += v * v;
  CHECK(sq / 300.0 == doctest::Approx(1.0 / 300.0).epsilon(0.5));
  const auto p1 = parse_description("a zorblax", shipped());
  const auto p2 = parse_description("a zorblax", shipped());
  CHECK(p1.phrases.size() == 1);
  CHECK(p1.phrases[0].score == p2.phrases[0].score);
  CHECK(p1.attributes == p2.attributes);
}

TEST_CASE("assign_category") {
  const auto& r = shipped();
  const auto shirt = assign_category(embed_phrase(Tokens{"shirt"}, r.store), r.dictionary, 0.3);
  REQUIRE(shirt.has_value());
  CHECK(shirt->category == AttributeCategory::UpperBody);

  for (AttributeCategory c : kAllCategories) {
    const auto anchor = r.dictionary.anchor(c);
    const auto a = assign_category(std::vector<double>(anchor.begin(), anchor.end()), r.dictionary, 0.3);
    REQUIRE(a.has_value());
    CHECK(a->category == c);
    CHECK(a->score == doctest::Approx(1.0).epsilon(1e-12));
    // Positive rescaling keeps the winner.
    std::vector<double> scaled(anchor.begin(), anchor.end());
    for (auto& v : scaled) v *= 17.0;
    CHECK(assign_category(scaled, r.dictionary, 0.3)->category == c);
  }

  // Orthogonal to every anchor: a 6-d store whose anchors span the first 5 axes.
  std::unordered_map<std::string, std::vector<double>> m;
  AttributeDictionary::WordLists words;
  for (std::size_t a = 0; a < 5; ++a) {
    std::vector<double> v(6, 0.0);
    v[a] = 1.0;
    m["w" + std::to_string(a)] = v;
    words[a] = {"w" + std::to_string(a)};
  }
  const WordVectorStore store(6, m);
  const AttributeDictionary dict(words, store);
  CHECK_FALSE(assign_category(std::vector<double>{0, 0, 0, 0, 0, 1}, dict, 0.3).has_value());
  CHECK_FALSE(assign_category(std::vector<double>(6, 0.0), dict, 0.3).has_value());
}

TEST_CASE("parse_description") {
  const auto& r = shipped();
  for (double theta : {0.2, 0.3, 0.5}) {
    const auto p = parse_description("a girl in white shirt and black skirt", r, theta);
    CHECK(p.attributes.size() == 2);
    CHECK(p.attributes.at(AttributeCategory::UpperBody) == Tokens{"white", "shirt"});
    CHECK(p.attributes.at(AttributeCategory::LowerBody) == Tokens{"black", "skirt"});
    CHECK(p.tokens.size() == 8);
  }
  CHECK(parse_description("", r).attributes.empty());
  const auto bag = parse_description("man carrying a backpack", r);
  CHECK(bag.attributes.size() == 1);
  CHECK(bag.attributes.at(AttributeCategory::Bags) == Tokens{"backpack"});

  // Two phrases of one category concatenate in sentence order.
  const auto two = parse_description("a black cap and white glasses", r);
  CHECK(two.attributes.at(AttributeCategory::Head) ==
        Tokens{"black", "cap", "white", "glasses"});
}

TEST_CASE("resource file errors carry line numbers") {
  std::istringstream bad_header("300\nshirt 1 2\n");
  CHECK(message_of([&] { WordVectorStore::parse(bad_header, "v.txt"); }).find("v.txt:1") !=
        std::string::npos);
  std::istringstream short_row("d_w 3\nshirt 1 2 3\npants 1 2\n");
  CHECK(message_of([&] { WordVectorStore::parse(short_row, "v.txt"); }).find("v.txt:3") !=
        std::string::npos);
  std::istringstream bad_num("d_w 2\nshirt 1 x\n");
  CHECK_THROWS_AS(WordVectorStore::parse(bad_num), Error);
  std::istringstream dup("d_w 1\nshirt 1\nshirt 2\n");
  CHECK_THROWS_AS(WordVectorStore::parse(dup), Error);

  std::istringstream lex("shirt noun\nred colour\n");
  CHECK(message_of([&] { Lexicon::parse(lex, "lex.txt"); }).find("lex.txt:2") != std::string::npos);

  std::istringstream dict("[head]\nhat\n[torso]\nshirt\n");
  CHECK(message_of([&] { AttributeDictionary::parse(dict, "d.dict"); }).find("d.dict:3") !=
        std::string::npos);
  std::istringstream empty_section("[head]\nhat\n[upper]\n[lower]\npants\n[shoes]\nboots\n[bags]\nbag\n");
  const auto lists = AttributeDictionary::parse(empty_section);
  CHECK_THROWS_AS(AttributeDictionary(lists, shipped().store), Error);
}
