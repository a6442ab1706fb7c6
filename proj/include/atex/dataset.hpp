#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "atex/corpus.hpp"

namespace atex {

// One ingested sentence: tokens with gold labels, optionally joined with POS
// tags and tree level indices from a dependency parse.
struct DataSentence {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<Label> labels;
  std::vector<std::string> upos;  // empty when no parse was supplied
  std::vector<int> levels;        // empty when no parse was supplied

  bool has_tree() const { return !levels.empty(); }
  LabeledSequence to_labeled() const { return {sentence_id, tokens, labels}; }
};

using Dataset = std::vector<DataSentence>;

// JSON-lines dataset format: one object per sentence with fields
// sentence_id, tokens, labels and (when present) upos, levels.
Dataset read_dataset_jsonl(std::istream& in);
Dataset read_dataset_jsonl_file(const std::string& path);
void write_dataset_jsonl(const Dataset& data, std::ostream& out);
void write_dataset_jsonl_file(const Dataset& data, const std::string& path);

// Frozen per-token vectors keyed by sentence id, loaded from JSON-lines
// objects {"sentence_id": ..., "vectors": [[...], ...]}.
struct ContextualStore {
  std::unordered_map<std::string, Eigen::MatrixXd> by_sentence;
  int dim = 0;

  const Eigen::MatrixXd* find(const std::string& sentence_id) const;
};

ContextualStore read_contextual_jsonl(std::istream& in);
ContextualStore read_contextual_jsonl_file(const std::string& path);

}  // namespace atex
