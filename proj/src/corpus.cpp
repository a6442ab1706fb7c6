#include "atex/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "atex/errors.hpp"
#include "atex/rng.hpp"
#include "atex/utf8.hpp"
#include "atex/xml.hpp"

namespace atex {

char label_char(Label l) {
  switch (l) {
    case Label::B: return 'B';
    case Label::I: return 'I';
    case Label::O: return 'O';
  }
  return '?';
}

Label label_from_string(std::string_view s) {
  if (s == "B") return Label::B;
  if (s == "I") return Label::I;
  if (s == "O") return Label::O;
  throw ArgumentError("unknown label \"" + std::string(s) + "\"");
}

bool is_well_formed_bio(const std::vector<Label>& labels) {
  Label prev = Label::O;
  for (Label l : labels) {
    if (l == Label::I && prev == Label::O) return false;
    prev = l;
  }
  return true;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const Review& r : reviews) n += r.sentences.size();
  return n;
}

namespace {

std::string trimmed(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::int64_t parse_offset(const std::string& value, const std::string& attr,
                          const std::string& sentence_id) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("sentence " + sentence_id + ": attribute " + attr +
                          "=\"" + value + "\" is not an integer");
  }
  return out;
}

Opinion parse_opinion(const xml::Node& node, const Sentence& sentence,
                      const std::vector<char32_t>& text_cps) {
  Opinion op;
  if (const std::string* v = node.attr("target")) op.target = *v;
  if (const std::string* v = node.attr("category")) op.category = *v;
  if (const std::string* v = node.attr("polarity")) op.polarity = *v;
  if (const std::string* v = node.attr("from"))
    op.from = parse_offset(*v, "from", sentence.id);
  if (const std::string* v = node.attr("to"))
    op.to = parse_offset(*v, "to", sentence.id);

  if (!op.spanless()) {
    const auto len = static_cast<std::int64_t>(text_cps.size());
    if (op.from < 0 || op.from >= op.to || op.to > len) {
      throw ValidationError("sentence " + sentence.id + ": opinion span [" +
                            std::to_string(op.from) + "," + std::to_string(op.to) +
                            ") out of bounds for text of length " + std::to_string(len));
    }
    std::string actual = utf8::encode(std::vector<char32_t>(
        text_cps.begin() + op.from, text_cps.begin() + op.to));
    if (actual != op.target) {
      throw ValidationError("sentence " + sentence.id + ": span [" +
                            std::to_string(op.from) + "," + std::to_string(op.to) +
                            ") reads \"" + actual + "\" but target is \"" +
                            op.target + "\"");
    }
  }
  return op;
}

}  // namespace

Corpus parse_semeval_xml(std::string_view xml_bytes) {
  xml::Node root = xml::parse(xml_bytes);
  if (root.name != "Reviews") {
    throw ParseError(root.line, "expected root element <Reviews>, got <" + root.name + ">");
  }

  Corpus corpus;
  std::unordered_set<std::string> seen_ids;
  for (const xml::Node* review_node : root.children_named("Review")) {
    Review review;
    if (const std::string* rid = review_node->attr("rid")) review.id = *rid;
    if (review.id.empty()) {
      if (const std::string* id = review_node->attr("id")) review.id = *id;
    }
    if (!seen_ids.insert(review.id).second) {
      throw ValidationError("duplicate review id \"" + review.id + "\"");
    }

    const xml::Node* sentences_node = review_node->child("sentences");
    if (sentences_node == nullptr) {
      throw ValidationError("review " + review.id + " has no <sentences> element");
    }
    for (const xml::Node* sentence_node : sentences_node->children_named("sentence")) {
      Sentence sentence;
      if (const std::string* id = sentence_node->attr("id")) sentence.id = *id;
      if (sentence.id.empty()) {
        throw ValidationError("review " + review.id + ": sentence without an id");
      }
      const xml::Node* text_node = sentence_node->child("text");
      if (text_node == nullptr || trimmed(text_node->text).empty()) {
        throw ValidationError("sentence " + sentence.id + " has empty text");
      }
      sentence.text = text_node->text;
      std::vector<char32_t> text_cps = utf8::decode(sentence.text);

      if (const xml::Node* opinions = sentence_node->child("Opinions")) {
        for (const xml::Node* op_node : opinions->children_named("Opinion")) {
          sentence.opinions.push_back(parse_opinion(*op_node, sentence, text_cps));
        }
      }
      review.sentences.push_back(std::move(sentence));
    }
    if (review.sentences.empty()) {
      throw ValidationError("review " + review.id + " has no sentences");
    }
    corpus.reviews.push_back(std::move(review));
  }
  return corpus;
}

std::string to_semeval_xml(const Corpus& corpus) {
  xml::Node root;
  root.name = "Reviews";
  for (const Review& review : corpus.reviews) {
    xml::Node review_node;
    review_node.name = "Review";
    review_node.attrs.emplace_back("rid", review.id);
    xml::Node sentences_node;
    sentences_node.name = "sentences";
    for (const Sentence& sentence : review.sentences) {
      xml::Node sentence_node;
      sentence_node.name = "sentence";
      sentence_node.attrs.emplace_back("id", sentence.id);
      xml::Node text_node;
      text_node.name = "text";
      text_node.text = sentence.text;
      sentence_node.children.push_back(std::move(text_node));
      if (!sentence.opinions.empty()) {
        xml::Node opinions_node;
        opinions_node.name = "Opinions";
        for (const Opinion& op : sentence.opinions) {
          xml::Node op_node;
          op_node.name = "Opinion";
          op_node.attrs.emplace_back("target", op.target);
          op_node.attrs.emplace_back("category", op.category);
          op_node.attrs.emplace_back("polarity", op.polarity);
          op_node.attrs.emplace_back("from", std::to_string(op.from));
          op_node.attrs.emplace_back("to", std::to_string(op.to));
          opinions_node.children.push_back(std::move(op_node));
        }
        sentence_node.children.push_back(std::move(opinions_node));
      }
      sentences_node.children.push_back(std::move(sentence_node));
    }
    review_node.children.push_back(std::move(sentences_node));
    root.children.push_back(std::move(review_node));
  }
  return xml::to_string(root);
}

void lowercase_corpus(Corpus& corpus) {
  for (Review& review : corpus.reviews) {
    for (Sentence& sentence : review.sentences) {
      sentence.text = utf8::lower(sentence.text);
      for (Opinion& op : sentence.opinions) {
        if (!op.spanless()) op.target = utf8::lower(op.target);
      }
    }
  }
}

std::pair<std::vector<std::string>, std::vector<TokenSpan>> whitespace_tokenize(
    std::string_view text) {
  std::vector<char32_t> cps = utf8::decode(text);
  std::vector<std::string> tokens;
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  auto is_space = [](char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f';
  };
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i])) ++i;
    if (i >= cps.size()) break;
    std::size_t start = i;
    while (i < cps.size() && !is_space(cps[i])) ++i;
    tokens.push_back(utf8::encode(std::vector<char32_t>(cps.begin() + start, cps.begin() + i)));
    spans.push_back({start, i});
  }
  return {std::move(tokens), std::move(spans)};
}

LabeledSequence to_bio(const Sentence& sentence,
                       const std::vector<std::string>& tokens,
                       const std::vector<TokenSpan>& token_spans) {
  if (tokens.size() != token_spans.size()) {
    throw ArgumentError("tokens and token_spans differ in length");
  }
  LabeledSequence seq;
  seq.sentence_id = sentence.id;
  seq.tokens = tokens;
  seq.labels.assign(tokens.size(), Label::O);

  // owner[t] remembers which opinion claimed token t, for the overlap report.
  std::vector<int> owner(tokens.size(), -1);
  for (std::size_t oi = 0; oi < sentence.opinions.size(); ++oi) {
    const Opinion& op = sentence.opinions[oi];
    if (op.spanless()) continue;
    bool first = true;
    bool any = false;
    for (std::size_t t = 0; t < token_spans.size(); ++t) {
      const TokenSpan& ts = token_spans[t];
      const bool overlaps = static_cast<std::int64_t>(ts.from) < op.to &&
                            op.from < static_cast<std::int64_t>(ts.to);
      if (!overlaps) continue;
      if (owner[t] >= 0) {
        throw OverlapError(sentence.id, sentence.opinions[owner[t]].target, op.target);
      }
      owner[t] = static_cast<int>(oi);
      seq.labels[t] = first ? Label::B : Label::I;
      first = false;
      any = true;
    }
    if (!any) {
      throw AlignmentError("sentence " + sentence.id + ": opinion \"" + op.target +
                           "\" [" + std::to_string(op.from) + "," +
                           std::to_string(op.to) + ") overlaps no token");
    }
  }
  return seq;
}

Sentence resolve_overlaps(const Sentence& sentence,
                          std::vector<OverlapWarning>* warnings) {
  Sentence out = sentence;
  std::vector<bool> dropped(out.opinions.size(), false);
  for (std::size_t a = 0; a < out.opinions.size(); ++a) {
    if (dropped[a] || out.opinions[a].spanless()) continue;
    for (std::size_t b = a + 1; b < out.opinions.size(); ++b) {
      if (dropped[b] || out.opinions[b].spanless()) continue;
      const Opinion& oa = out.opinions[a];
      const Opinion& ob = out.opinions[b];
      if (oa.from < ob.to && ob.from < oa.to) {
        // Keep the longer span; on ties the earlier opinion wins.
        std::size_t loser = (ob.to - ob.from) > (oa.to - oa.from) ? a : b;
        std::size_t keeper = loser == a ? b : a;
        dropped[loser] = true;
        if (warnings != nullptr) {
          warnings->push_back({sentence.id, out.opinions[keeper].target,
                               out.opinions[loser].target});
        }
      }
    }
  }
  std::vector<Opinion> kept;
  for (std::size_t i = 0; i < out.opinions.size(); ++i) {
    if (!dropped[i]) kept.push_back(out.opinions[i]);
  }
  out.opinions = std::move(kept);
  return out;
}

std::vector<std::pair<Corpus, Corpus>> kfold_split(const Corpus& corpus, int k,
                                                   std::uint64_t seed) {
  const std::size_t n = corpus.reviews.size();
  if (k < 2) throw ArgumentError("kfold_split requires k >= 2");
  if (n < static_cast<std::size_t>(k)) {
    throw ArgumentError("kfold_split: " + std::to_string(n) + " reviews cannot fill " +
                        std::to_string(k) + " folds");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  // Fold sizes differ by at most one; the first n % k folds get the extra.
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) folds[f].push_back(order[pos++]);
  }

  std::vector<std::pair<Corpus, Corpus>> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    Corpus train, test;
    train.split_tag = SplitTag::train;
    test.split_tag = SplitTag::test;
    std::vector<bool> in_test(n, false);
    for (std::size_t idx : folds[f]) in_test[idx] = true;
    for (std::size_t i = 0; i < n; ++i) {
      (in_test[i] ? test : train).reviews.push_back(corpus.reviews[i]);
    }
    out.emplace_back(std::move(train), std::move(test));
  }
  return out;
}

}  // namespace atex
