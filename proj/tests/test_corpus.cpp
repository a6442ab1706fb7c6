#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "atex/corpus.hpp"
#include "atex/errors.hpp"
#include "atex/rng.hpp"
#include "atex/utf8.hpp"

using namespace atex;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(ATEX_FIXTURE_DIR) + "/" + name, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Sentence make_sentence(const std::string& id, const std::string& text,
                       std::vector<Opinion> opinions) {
  return {id, text, std::move(opinions)};
}

}  // namespace

TEST_SUITE_BEGIN("corpus");

TEST_CASE("parses the single-review fixture") {
  const Corpus corpus = parse_semeval_xml(read_fixture("listing1.xml"));
  REQUIRE(corpus.reviews.size() == 1);
  const Review& review = corpus.reviews[0];
  CHECK(review.id == "1004293");
  REQUIRE(review.sentences.size() == 1);
  const Sentence& sentence = review.sentences[0];
  CHECK(sentence.text == "Güzel yemekler çok taze.");
  REQUIRE(sentence.opinions.size() == 1);
  const Opinion& op = sentence.opinions[0];
  CHECK(op.target == "yemekler");
  CHECK(op.from == 6);
  CHECK(op.to == 14);
  CHECK(op.category == "FOOD#QUALITY");
  CHECK_FALSE(op.spanless());
}

TEST_CASE("document without opinions yields empty opinion lists") {
  const std::string doc =
      "<Reviews><Review rid=\"r\"><sentences>"
      "<sentence id=\"r:0\"><text>iyi bir yer</text></sentence>"
      "<sentence id=\"r:1\"><text>tekrar gelirim</text></sentence>"
      "</sentences></Review></Reviews>";
  const Corpus corpus = parse_semeval_xml(doc);
  REQUIRE(corpus.reviews.size() == 1);
  for (const Sentence& s : corpus.reviews[0].sentences) CHECK(s.opinions.empty());
}

TEST_CASE("real SemEval Turkish training file, when available") {
  const char* dir = std::getenv("ATEX_SEMEVAL_DIR");
  if (dir == nullptr) {
    MESSAGE("ATEX_SEMEVAL_DIR not set; skipping the licensed-dataset count check");
    return;
  }
  std::ifstream in(std::string(dir) + "/turkish_train.xml", std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  const Corpus corpus = parse_semeval_xml(ss.str());
  CHECK(corpus.reviews.size() == 1104);
}

TEST_CASE("validation errors name the offending sentence") {
  const std::string base =
      "<Reviews><Review rid=\"r\"><sentences><sentence id=\"r:0\">"
      "<text>iyi yer</text><Opinions>%s</Opinions></sentence>"
      "</sentences></Review></Reviews>";
  const auto with_opinion = [&](const std::string& op) {
    std::string doc = base;
    doc.replace(doc.find("%s"), 2, op);
    return doc;
  };

  SUBCASE("non-integer offsets") {
    try {
      parse_semeval_xml(with_opinion(
          "<Opinion target=\"iyi\" category=\"c\" polarity=\"p\" from=\"x\" to=\"3\"/>"));
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("r:0") != std::string::npos);
    }
  }
  SUBCASE("span out of bounds") {
    CHECK_THROWS_AS(parse_semeval_xml(with_opinion(
                        "<Opinion target=\"yer\" category=\"c\" polarity=\"p\" "
                        "from=\"4\" to=\"20\"/>")),
                    ValidationError);
    CHECK_THROWS_AS(parse_semeval_xml(with_opinion(
                        "<Opinion target=\"x\" category=\"c\" polarity=\"p\" "
                        "from=\"3\" to=\"3\"/>")),
                    ValidationError);
  }
  SUBCASE("substring mismatch names sentence and target") {
    try {
      parse_semeval_xml(with_opinion(
          "<Opinion target=\"kötü\" category=\"c\" polarity=\"p\" from=\"0\" to=\"3\"/>"));
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      CHECK(what.find("r:0") != std::string::npos);
      CHECK(what.find("kötü") != std::string::npos);
    }
  }
  SUBCASE("malformed xml reports a line") {
    try {
      parse_semeval_xml("<Reviews>\n<Review>\n<broken\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() > 0);
    }
  }
  SUBCASE("duplicate review ids rejected") {
    const std::string doc =
        "<Reviews>"
        "<Review rid=\"a\"><sentences><sentence id=\"a:0\"><text>x y</text></sentence>"
        "</sentences></Review>"
        "<Review rid=\"a\"><sentences><sentence id=\"a:1\"><text>x y</text></sentence>"
        "</sentences></Review></Reviews>";
    CHECK_THROWS_AS(parse_semeval_xml(doc), ValidationError);
  }
}

TEST_CASE("whitespace tokenizer reports code-point spans") {
  SUBCASE("plain sentence") {
    const auto [tokens, spans] = whitespace_tokenize("lokumu tavsiye ederim.");
    CHECK(tokens == std::vector<std::string>{"lokumu", "tavsiye", "ederim."});
    REQUIRE(spans.size() == 3);
    CHECK(spans[0] == TokenSpan{0, 6});
    CHECK(spans[1] == TokenSpan{7, 14});
    CHECK(spans[2] == TokenSpan{15, 22});
  }
  SUBCASE("empty text") {
    const auto [tokens, spans] = whitespace_tokenize("");
    CHECK(tokens.empty());
    CHECK(spans.empty());
  }
  SUBCASE("surrounding and repeated whitespace") {
    const auto [tokens, spans] = whitespace_tokenize("  a  b ");
    CHECK(tokens == std::vector<std::string>{"a", "b"});
    CHECK(spans[0] == TokenSpan{2, 3});
    CHECK(spans[1] == TokenSpan{5, 6});
  }
  SUBCASE("multibyte offsets count code points") {
    const auto [tokens, spans] = whitespace_tokenize("ördek göğsü");
    CHECK(tokens == std::vector<std::string>{"ördek", "göğsü"});
    CHECK(spans[0] == TokenSpan{0, 5});
    CHECK(spans[1] == TokenSpan{6, 11});
  }
  SUBCASE("gaps reconstruct the original text") {
    const std::string text = "bir  iki\tüç";
    const auto [tokens, spans] = whitespace_tokenize(text);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      CHECK(utf8::slice(text, spans[i].from, spans[i].to) == tokens[i]);
    }
  }
}

TEST_CASE("to_bio marks the first overlapped token B and the rest I") {
  SUBCASE("single-token aspect") {
    const Sentence s = make_sentence(
        "t1", "lokumu tavsiye ederim.",
        {{"lokumu", "FOOD#QUALITY", "positive", 0, 6}});
    const auto [tokens, spans] = whitespace_tokenize(s.text);
    const LabeledSequence seq = to_bio(s, tokens, spans);
    CHECK(seq.labels == std::vector<Label>{Label::B, Label::O, Label::O});
  }
  SUBCASE("three-word aspect at word positions 3..5 of 7") {
    const std::string text = "Son ziyaretimde ördek göğsü özel vardı inanılmazdı.";
    const Sentence s = make_sentence(
        "t2", text, {{"ördek göğsü özel", "FOOD#QUALITY", "positive", 16, 32}});
    const auto [tokens, spans] = whitespace_tokenize(text);
    REQUIRE(tokens.size() == 7);
    CHECK(utf8::slice(text, 16, 32) == "ördek göğsü özel");
    const LabeledSequence seq = to_bio(s, tokens, spans);
    CHECK(seq.labels == std::vector<Label>{Label::O, Label::O, Label::B, Label::I,
                                           Label::I, Label::O, Label::O});
  }
  SUBCASE("no opinions means all O") {
    const Sentence s = make_sentence("t3", "iyi bir yer", {});
    const auto [tokens, spans] = whitespace_tokenize(s.text);
    const LabeledSequence seq = to_bio(s, tokens, spans);
    CHECK(seq.labels == std::vector<Label>(3, Label::O));
  }
  SUBCASE("NULL opinions produce no labels") {
    const Sentence s = make_sentence("t4", "iyi bir yer", {{"NULL", "c", "p", 0, 0}});
    const auto [tokens, spans] = whitespace_tokenize(s.text);
    CHECK(to_bio(s, tokens, spans).labels == std::vector<Label>(3, Label::O));
  }
  SUBCASE("span bisecting a token labels the whole token") {
    const Sentence s = make_sentence("t5", "lokumu tavsiye ederim.",
                                     {{"loku", "c", "p", 0, 4}});
    const auto [tokens, spans] = whitespace_tokenize(s.text);
    CHECK(to_bio(s, tokens, spans).labels ==
          std::vector<Label>{Label::B, Label::O, Label::O});
  }
  SUBCASE("overlapping opinions raise an error naming both") {
    const Sentence s = make_sentence(
        "t6", "ördek göğsü özel vardı",
        {{"ördek göğsü", "c", "p", 0, 11}, {"göğsü özel", "c", "p", 6, 16}});
    const auto [tokens, spans] = whitespace_tokenize(s.text);
    try {
      to_bio(s, tokens, spans);
      FAIL("expected OverlapError");
    } catch (const OverlapError& e) {
      CHECK(e.first() == "ördek göğsü");
      CHECK(e.second() == "göğsü özel");
    }
  }
  SUBCASE("span over no token is an alignment error") {
    // Opinion points into the gap between tokens.
    const Sentence s = make_sentence("t7", "a  b", {{" ", "c", "p", 1, 2}});
    const auto [tokens, spans] = whitespace_tokenize(s.text);
    CHECK_THROWS_AS(to_bio(s, tokens, spans), AlignmentError);
  }
}

TEST_CASE("resolve_overlaps keeps the longer span and reports the drop") {
  const Sentence s = make_sentence(
      "t8", "ördek göğsü özel vardı",
      {{"ördek", "c", "p", 0, 5}, {"ördek göğsü özel", "c", "p", 0, 16}});
  std::vector<OverlapWarning> warnings;
  const Sentence resolved = resolve_overlaps(s, &warnings);
  REQUIRE(resolved.opinions.size() == 1);
  CHECK(resolved.opinions[0].target == "ördek göğsü özel");
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].kept == "ördek göğsü özel");
  CHECK(warnings[0].dropped == "ördek");
  CHECK(warnings[0].sentence_id == "t8");

  // Equal lengths: the earlier opinion wins.
  const Sentence tie = make_sentence(
      "t9", "aa bb", {{"aa", "c", "p", 0, 2}, {"a ", "c", "p", 1, 3}});
  std::vector<OverlapWarning> tie_warnings;
  const Sentence tie_resolved = resolve_overlaps(tie, &tie_warnings);
  REQUIRE(tie_resolved.opinions.size() == 1);
  CHECK(tie_resolved.opinions[0].target == "aa");
}

TEST_CASE("corpus round trips through XML serialization") {
  for (const char* fixture : {"listing1.xml", "multi.xml", "synthetic50.xml"}) {
    const Corpus corpus = parse_semeval_xml(read_fixture(fixture));
    const Corpus again = parse_semeval_xml(to_semeval_xml(corpus));
    CHECK(again == corpus);
  }
}

TEST_CASE("lowercasing preserves spans and annotations") {
  Corpus corpus = parse_semeval_xml(read_fixture("multi.xml"));
  lowercase_corpus(corpus);
  const Sentence& s5 = corpus.reviews[2].sentences[0];
  CHECK(s5.text == "ördek göğsü özel harikaydı.");
  CHECK(s5.opinions[0].target == "ördek göğsü özel");
  // Spans still verify against the lowered text.
  CHECK(utf8::slice(s5.text, static_cast<std::size_t>(s5.opinions[0].from),
                    static_cast<std::size_t>(s5.opinions[0].to)) == s5.opinions[0].target);
}

// Random non-overlapping opinions: BIO output is well formed and its spans
// map back to the opinion spans clipped to token boundaries.
TEST_CASE("to_bio span multiset property on random sentences") {
  Rng rng(1234);
  for (int iter = 0; iter < 200; ++iter) {
    const int n_tokens = 1 + static_cast<int>(rng.below(9));
    std::string text;
    std::vector<TokenSpan> token_spans;
    std::size_t pos = 0;
    for (int t = 0; t < n_tokens; ++t) {
      const int len = 1 + static_cast<int>(rng.below(4));
      if (t > 0) {
        text += ' ';
        ++pos;
      }
      token_spans.push_back({pos, pos + static_cast<std::size_t>(len)});
      for (int k = 0; k < len; ++k) text += static_cast<char>('a' + rng.below(4));
      pos += static_cast<std::size_t>(len);
    }
    const auto [tokens, spans] = whitespace_tokenize(text);
    REQUIRE(spans.size() == static_cast<std::size_t>(n_tokens));

    // Plant up to two non-overlapping opinions on whole-token boundaries.
    Sentence s{"prop", text, {}};
    std::vector<std::pair<std::size_t, std::size_t>> expected;
    int cursor = 0;
    for (int k = 0; k < 2 && cursor < n_tokens; ++k) {
      const int start = cursor + static_cast<int>(rng.below(
                                     static_cast<std::uint64_t>(n_tokens - cursor)));
      const int len = 1 + static_cast<int>(rng.below(
                              static_cast<std::uint64_t>(n_tokens - start)));
      if (rng.below(2) == 0) {
        const std::size_t from = spans[static_cast<std::size_t>(start)].from;
        const std::size_t to = spans[static_cast<std::size_t>(start + len - 1)].to;
        s.opinions.push_back({utf8::slice(text, from, to), "c", "p",
                              static_cast<std::int64_t>(from),
                              static_cast<std::int64_t>(to)});
        expected.emplace_back(from, to);
      }
      cursor = start + len;
    }

    const LabeledSequence seq = to_bio(s, tokens, spans);
    CHECK(is_well_formed_bio(seq.labels));

    // Recover spans from the labels.
    std::vector<std::pair<std::size_t, std::size_t>> got;
    for (std::size_t t = 0; t < seq.labels.size(); ++t) {
      if (seq.labels[t] == Label::B) {
        std::size_t end = t;
        while (end + 1 < seq.labels.size() && seq.labels[end + 1] == Label::I) ++end;
        got.emplace_back(spans[t].from, spans[end].to);
      }
    }
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    CHECK(got == expected);
  }
}

TEST_CASE("kfold splits are balanced, disjoint and deterministic") {
  const auto corpus_of = [](int n) {
    Corpus c;
    for (int i = 0; i < n; ++i) {
      Review r;
      r.id = "r" + std::to_string(i);
      r.sentences.push_back({r.id + ":0", "bir iki", {}});
      c.reviews.push_back(std::move(r));
    }
    return c;
  };

  SUBCASE("exact division") {
    const auto folds = kfold_split(corpus_of(10), 5, 7);
    REQUIRE(folds.size() == 5);
    for (const auto& [train, test] : folds) {
      CHECK(train.reviews.size() == 8);
      CHECK(test.reviews.size() == 2);
      CHECK(train.split_tag == SplitTag::train);
      CHECK(test.split_tag == SplitTag::test);
    }
  }
  SUBCASE("remainder spreads over folds") {
    const auto folds = kfold_split(corpus_of(11), 5, 7);
    std::multiset<std::size_t> sizes;
    for (const auto& [train, test] : folds) sizes.insert(test.reviews.size());
    CHECK(sizes == std::multiset<std::size_t>{3, 2, 2, 2, 2});
  }
  SUBCASE("deterministic under the same seed") {
    const auto a = kfold_split(corpus_of(13), 4, 99);
    const auto b = kfold_split(corpus_of(13), 4, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].first == b[i].first);
      CHECK(a[i].second == b[i].second);
    }
  }
  SUBCASE("test folds partition the corpus") {
    const Corpus corpus = corpus_of(13);
    const auto folds = kfold_split(corpus, 4, 3);
    std::multiset<std::string> seen;
    for (const auto& [train, test] : folds) {
      for (const Review& r : test.reviews) seen.insert(r.id);
      // Train and test are disjoint within a fold.
      for (const Review& tr : train.reviews) {
        for (const Review& te : test.reviews) CHECK(tr.id != te.id);
      }
      CHECK(train.reviews.size() + test.reviews.size() == corpus.reviews.size());
    }
    CHECK(seen.size() == corpus.reviews.size());  // every review exactly once
  }
  SUBCASE("argument errors") {
    CHECK_THROWS_AS(kfold_split(corpus_of(5), 1, 0), ArgumentError);
    CHECK_THROWS_AS(kfold_split(corpus_of(3), 5, 0), ArgumentError);
  }
}

TEST_SUITE_END();
