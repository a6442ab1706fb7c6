#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atex {

// BIO tag set, in the fixed label order used everywhere (scores, transition
// matrix, checkpoints).
enum class Label : int { B = 0, I = 1, O = 2 };
inline constexpr int kNumLabels = 3;

char label_char(Label l);
Label label_from_string(std::string_view s);  // throws ArgumentError
bool is_well_formed_bio(const std::vector<Label>& labels);

// One aspect annotation. `from`/`to` are 0-based code-point offsets into the
// sentence text, end-exclusive. target == "NULL" marks a span-less opinion
// that is kept in the data model but never labeled.
struct Opinion {
  std::string target;
  std::string category;
  std::string polarity;
  std::int64_t from = 0;
  std::int64_t to = 0;

  bool spanless() const { return target == "NULL"; }
  bool operator==(const Opinion&) const = default;
};

struct Sentence {
  std::string id;
  std::string text;
  std::vector<Opinion> opinions;

  bool operator==(const Sentence&) const = default;
};

struct Review {
  std::string id;
  std::vector<Sentence> sentences;

  bool operator==(const Review&) const = default;
};

enum class SplitTag { train, test, unsplit };

struct Corpus {
  std::vector<Review> reviews;
  SplitTag split_tag = SplitTag::unsplit;

  std::size_t sentence_count() const;
  bool operator==(const Corpus&) const = default;
};

struct LabeledSequence {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<Label> labels;

  bool operator==(const LabeledSequence&) const = default;
};

// Parses a SemEval-style review document
// (Reviews/Review/sentences/sentence/text with optional Opinions/Opinion).
// Validates spans against the sentence text; throws ParseError or
// ValidationError.
Corpus parse_semeval_xml(std::string_view xml_bytes);

// Inverse of parse_semeval_xml up to whitespace; parse(to_semeval_xml(c)) == c.
std::string to_semeval_xml(const Corpus& corpus);

// In-place one-to-one lowercasing of sentence texts and opinion targets.
// Code-point offsets are unaffected.
void lowercase_corpus(Corpus& corpus);

// Code-point span of a token in the original text, end-exclusive.
struct TokenSpan {
  std::size_t from = 0;
  std::size_t to = 0;
  bool operator==(const TokenSpan&) const = default;
};

// Splits on ASCII whitespace; tokens are maximal non-whitespace runs and
// spans index code points of the original text.
std::pair<std::vector<std::string>, std::vector<TokenSpan>> whitespace_tokenize(
    std::string_view text);

// Converts character-span opinions to token-level BIO labels. The first token
// overlapping an opinion span gets B, later ones I. Throws OverlapError when
// two opinions claim a token and AlignmentError when a span covers no token.
LabeledSequence to_bio(const Sentence& sentence,
                       const std::vector<std::string>& tokens,
                       const std::vector<TokenSpan>& token_spans);

struct OverlapWarning {
  std::string sentence_id;
  std::string kept;
  std::string dropped;
};

// Returns a copy of the sentence with overlapping opinions resolved by
// keeping the longer span (earlier one on ties). Dropped opinions are
// reported through `warnings` when non-null.
Sentence resolve_overlaps(const Sentence& sentence,
                          std::vector<OverlapWarning>* warnings);

// Deterministic review-level k-fold split: reviews are shuffled by seed and
// cut into k folds differing in size by at most one. Pair i is
// (all folds except i, fold i).
std::vector<std::pair<Corpus, Corpus>> kfold_split(const Corpus& corpus, int k,
                                                   std::uint64_t seed);

}  // namespace atex
