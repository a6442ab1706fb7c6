#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace atex {

// The 17-tag Universal Dependencies POS inventory.
inline constexpr std::array<std::string_view, 17> kUposTags = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

bool is_upos(std::string_view tag);

struct DepToken {
  int index = 0;  // 1-based position within the sentence
  std::string form;
  std::string upos;
  int head = 0;  // 0 means root
  std::string deprel;

  bool operator==(const DepToken&) const = default;
};

struct DepTree {
  std::string sentence_id;
  std::vector<DepToken> tokens;
  int root_index = 0;  // 1-based index of the token whose head is 0

  bool operator==(const DepTree&) const = default;
};

// Level index per token: the root carries max_index (the depth of the deepest
// token) and every other token carries max_index - depth(token), so the
// deepest tokens sit at 0.
struct LevelIndexVector {
  std::vector<int> values;  // one per token, in token order
  int max_index = 0;
};

// Parses CoNLL-U text into validated trees. Multiword-token ranges ("3-4")
// are skipped, empty-node ids ("5.1") are rejected, and each sentence must
// form a single rooted tree. `# sent_id = ...` comments populate sentence_id.
std::vector<DepTree> parse_conllu(std::string_view text);

// Serializes the retained columns (ID, FORM, UPOS, HEAD, DEPREL); the other
// five are written as "_". parse_conllu(to_conllu(ts)) == ts.
std::string to_conllu(const std::vector<DepTree>& trees);

LevelIndexVector level_indices(const DepTree& tree);

// Maps each whitespace token to the run of tree tokens it covers (0-based
// positions into tree.tokens). Identity when forms match pairwise; otherwise
// a greedy left-to-right surface alignment that lets one whitespace token
// span several tree tokens (parsers split punctuation). Comparison is
// case-insensitive. Throws AlignmentError when no alignment exists.
std::vector<std::vector<int>> align_tokens(const std::vector<std::string>& sentence_tokens,
                                           const DepTree& tree);

// POS tag and level index for each whitespace token under an alignment: the
// first mapped non-PUNCT tree token decides, falling back to the first.
struct TokenAnnotation {
  std::string upos;
  int level = 0;
};

std::vector<TokenAnnotation> annotate_tokens(const std::vector<std::vector<int>>& alignment,
                                             const DepTree& tree,
                                             const LevelIndexVector& levels);

}  // namespace atex
