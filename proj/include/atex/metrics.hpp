#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "atex/corpus.hpp"

namespace atex {

struct LabelStats {
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long support = 0;  // gold token count
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Token-level report over the three labels plus the averaged figures. Labels
// with zero support and zero predictions are excluded from the macro means;
// macro_f1_bi restricts the mean to B and I.
struct LabelReport {
  std::array<LabelStats, kNumLabels> per_label;
  double macro_f1_all = 0;
  double macro_f1_bi = 0;
  double weighted_f1 = 0;
  long total_tokens = 0;
};

// Per-label precision/recall/F1 with F1 = TP / (TP + (FP + FN) / 2). Gold and
// predicted sequences must pair up by position with matching ids and lengths.
LabelReport token_prf(const std::vector<LabeledSequence>& gold,
                      const std::vector<LabeledSequence>& pred);

// Promotes each leading I (one with no B/I directly before it) to B so that
// span extraction is well defined on unconstrained decodes.
std::vector<Label> repair_bio(const std::vector<Label>& labels);

// Maximal B I* runs as [start, end) token index pairs.
std::vector<std::pair<int, int>> extract_spans(const std::vector<Label>& labels);

struct SpanScore {
  long tp = 0;
  long gold_count = 0;
  long pred_count = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

// Exact-match span diagnostic: a predicted span counts only when its
// (start, end) equals a gold span in the same sentence. Predictions are
// BIO-repaired first. With no spans on either side every figure is 1.
SpanScore span_exact_match(const std::vector<LabeledSequence>& gold,
                           const std::vector<LabeledSequence>& pred);

std::string report_to_table(const LabelReport& report);

}  // namespace atex
