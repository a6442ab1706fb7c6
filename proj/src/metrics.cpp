#include "atex/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "atex/errors.hpp"

namespace atex {

namespace {

double safe_div(double num, double den) { return den == 0 ? 0.0 : num / den; }

void check_aligned(const std::vector<LabeledSequence>& gold,
                   const std::vector<LabeledSequence>& pred) {
  if (gold.size() != pred.size()) {
    throw ArgumentError("metrics: " + std::to_string(gold.size()) + " gold vs " +
                        std::to_string(pred.size()) + " predicted sequences");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].sentence_id != pred[i].sentence_id) {
      throw ArgumentError("metrics: sentence id mismatch at position " + std::to_string(i) +
                          " (" + gold[i].sentence_id + " vs " + pred[i].sentence_id + ")");
    }
    if (gold[i].labels.size() != pred[i].labels.size()) {
      throw ArgumentError("metrics: length mismatch for sentence " + gold[i].sentence_id);
    }
  }
}

}  // namespace

LabelReport token_prf(const std::vector<LabeledSequence>& gold,
                      const std::vector<LabeledSequence>& pred) {
  check_aligned(gold, pred);

  LabelReport report;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].labels.size(); ++t) {
      const int g = static_cast<int>(gold[i].labels[t]);
      const int p = static_cast<int>(pred[i].labels[t]);
      ++report.per_label[static_cast<std::size_t>(g)].support;
      ++report.total_tokens;
      if (g == p) {
        ++report.per_label[static_cast<std::size_t>(g)].tp;
      } else {
        ++report.per_label[static_cast<std::size_t>(p)].fp;
        ++report.per_label[static_cast<std::size_t>(g)].fn;
      }
    }
  }

  for (LabelStats& s : report.per_label) {
    s.precision = safe_div(static_cast<double>(s.tp), static_cast<double>(s.tp + s.fp));
    s.recall = safe_div(static_cast<double>(s.tp), static_cast<double>(s.tp + s.fn));
    s.f1 = safe_div(static_cast<double>(s.tp),
                    static_cast<double>(s.tp) + 0.5 * static_cast<double>(s.fp + s.fn));
  }

  double weighted_sum = 0;
  long support_sum = 0;
  double macro_sum_all = 0, macro_sum_bi = 0;
  int macro_n_all = 0, macro_n_bi = 0;
  for (int l = 0; l < kNumLabels; ++l) {
    const LabelStats& s = report.per_label[static_cast<std::size_t>(l)];
    weighted_sum += static_cast<double>(s.support) * s.f1;
    support_sum += s.support;
    const bool absent = s.support == 0 && s.tp + s.fp == 0;  // never gold, never predicted
    if (absent) continue;
    macro_sum_all += s.f1;
    ++macro_n_all;
    if (l != static_cast<int>(Label::O)) {
      macro_sum_bi += s.f1;
      ++macro_n_bi;
    }
  }
  report.weighted_f1 = safe_div(weighted_sum, static_cast<double>(support_sum));
  report.macro_f1_all = safe_div(macro_sum_all, macro_n_all);
  report.macro_f1_bi = safe_div(macro_sum_bi, macro_n_bi);
  return report;
}

std::vector<Label> repair_bio(const std::vector<Label>& labels) {
  std::vector<Label> out = labels;
  Label prev = Label::O;
  for (Label& l : out) {
    if (l == Label::I && prev == Label::O) l = Label::B;
    prev = l;
  }
  return out;
}

std::vector<std::pair<int, int>> extract_spans(const std::vector<Label>& labels) {
  std::vector<std::pair<int, int>> spans;
  int start = -1;
  for (int t = 0; t < static_cast<int>(labels.size()); ++t) {
    const Label l = labels[static_cast<std::size_t>(t)];
    if (l == Label::B) {
      if (start >= 0) spans.emplace_back(start, t);
      start = t;
    } else if (l == Label::O) {
      if (start >= 0) spans.emplace_back(start, t);
      start = -1;
    }
  }
  if (start >= 0) spans.emplace_back(start, static_cast<int>(labels.size()));
  return spans;
}

SpanScore span_exact_match(const std::vector<LabeledSequence>& gold,
                           const std::vector<LabeledSequence>& pred) {
  check_aligned(gold, pred);

  SpanScore score;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto gold_spans = extract_spans(repair_bio(gold[i].labels));
    const auto pred_spans = extract_spans(repair_bio(pred[i].labels));
    score.gold_count += static_cast<long>(gold_spans.size());
    score.pred_count += static_cast<long>(pred_spans.size());
    for (const auto& span : pred_spans) {
      if (std::find(gold_spans.begin(), gold_spans.end(), span) != gold_spans.end()) {
        ++score.tp;
      }
    }
  }
  if (score.gold_count == 0 && score.pred_count == 0) {
    score.precision = score.recall = score.f1 = 1.0;  // vacuous agreement
    return score;
  }
  score.precision = safe_div(static_cast<double>(score.tp), static_cast<double>(score.pred_count));
  score.recall = safe_div(static_cast<double>(score.tp), static_cast<double>(score.gold_count));
  score.f1 = safe_div(static_cast<double>(score.tp),
                      static_cast<double>(score.tp) +
                          0.5 * static_cast<double>((score.pred_count - score.tp) +
                                                    (score.gold_count - score.tp)));
  return score;
}

std::string report_to_table(const LabelReport& report) {
  char buf[128];
  std::string out = "label  precision  recall     f1         support\n";
  for (int l = 0; l < kNumLabels; ++l) {
    const LabelStats& s = report.per_label[static_cast<std::size_t>(l)];
    std::snprintf(buf, sizeof(buf), "%-6c %-10.4f %-10.4f %-10.4f %ld\n",
                  label_char(static_cast<Label>(l)), s.precision, s.recall, s.f1, s.support);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "macro(all)=%.4f macro(B,I)=%.4f weighted=%.4f tokens=%ld\n",
                report.macro_f1_all, report.macro_f1_bi, report.weighted_f1,
                report.total_tokens);
  out += buf;
  return out;
}

}  // namespace atex
