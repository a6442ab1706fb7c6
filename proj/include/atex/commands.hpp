#pragma once

#include <string>
#include <vector>

#include "atex/config.hpp"
#include "atex/corpus.hpp"
#include "atex/dataset.hpp"
#include "atex/deptree.hpp"

namespace atex {

struct IngestStats {
  long reviews = 0;
  long sentences = 0;
  long tokens = 0;
  long opinions = 0;
  long null_opinions = 0;
  long labeled_spans = 0;
  std::vector<OverlapWarning> dropped_overlaps;
};

// Pairs every corpus sentence with its dependency tree: by `# sent_id` when
// all sentence ids resolve, by document order otherwise (counts must match).
std::vector<const DepTree*> join_trees(const Corpus& corpus,
                                       const std::vector<DepTree>& trees);

// Tokenizes, resolves span overlaps, converts opinions to BIO labels and,
// when trees are given, joins POS tags and level indices per token.
Dataset build_dataset(const Corpus& corpus, const std::vector<DepTree>* trees,
                      IngestStats* stats);

// XML (+ optional CoNLL-U) files to a ready dataset.
Dataset ingest_files(const std::string& xml_path, const std::string& conllu_path,
                     bool uncased, IngestStats* stats);

// CLI entry points. Each validates its config before touching outputs and
// returns a process exit code.
int cmd_ingest(const RunConfig& cfg);
int cmd_train(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_kfold(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_gradcheck(const RunConfig& cfg);

}  // namespace atex
