#include <doctest.h>

#include <algorithm>

#include "atex/errors.hpp"
#include "atex/metrics.hpp"
#include "atex/rng.hpp"

using namespace atex;

namespace {

LabeledSequence seq(const std::string& id, std::vector<Label> labels) {
  LabeledSequence s;
  s.sentence_id = id;
  s.labels = std::move(labels);
  s.tokens.assign(s.labels.size(), "w");
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("perfect prediction scores one everywhere") {
  const std::vector<LabeledSequence> gold{
      seq("a", {Label::B, Label::I, Label::O}), seq("b", {Label::O, Label::B, Label::O})};
  const LabelReport r = token_prf(gold, gold);
  for (const LabelStats& s : r.per_label) {
    CHECK(s.f1 == 1.0);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
  }
  CHECK(r.macro_f1_all == 1.0);
  CHECK(r.macro_f1_bi == 1.0);
  CHECK(r.weighted_f1 == 1.0);
}

TEST_CASE("F1 = TP / (TP + (FP+FN)/2) on a hand-built confusion") {
  // Build sequences giving label B exactly TP=2, FP=1, FN=1.
  const std::vector<LabeledSequence> gold{
      seq("a", {Label::B, Label::B, Label::B, Label::O})};
  const std::vector<LabeledSequence> pred{
      seq("a", {Label::B, Label::B, Label::O, Label::B})};
  const LabelReport r = token_prf(gold, pred);
  const LabelStats& b = r.per_label[0];
  CHECK(b.tp == 2);
  CHECK(b.fp == 1);
  CHECK(b.fn == 1);
  CHECK(b.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(b.f1 == doctest::Approx(0.6667).epsilon(1e-4));
}

TEST_CASE("miss on the only B token") {
  const std::vector<LabeledSequence> gold{seq("a", {Label::B, Label::O, Label::O})};
  const std::vector<LabeledSequence> pred{seq("a", {Label::O, Label::O, Label::O})};
  const LabelReport r = token_prf(gold, pred);
  const LabelStats& b = r.per_label[static_cast<int>(Label::B)];
  CHECK(b.tp == 0);
  CHECK(b.fn == 1);
  CHECK(b.f1 == 0.0);
  CHECK(b.support == 1);
  const LabelStats& o = r.per_label[static_cast<int>(Label::O)];
  CHECK(o.tp == 2);
  CHECK(o.fp == 1);
  CHECK(o.f1 == doctest::Approx(0.8).epsilon(1e-12));
  // I was never gold nor predicted: excluded from the macro mean.
  CHECK(r.macro_f1_all == doctest::Approx((0.0 + 0.8) / 2).epsilon(1e-12));
  CHECK(r.macro_f1_bi == 0.0);
  // Weighted mean: (1*0 + 2*0.8) / 3.
  CHECK(r.weighted_f1 == doctest::Approx(1.6 / 3).epsilon(1e-12));
}

TEST_CASE("count identities and ordering invariance") {
  Rng rng(17);
  std::vector<LabeledSequence> gold, pred;
  long total = 0;
  for (int i = 0; i < 12; ++i) {
    const int len = 1 + static_cast<int>(rng.below(7));
    std::vector<Label> g, p;
    for (int t = 0; t < len; ++t) {
      g.push_back(static_cast<Label>(rng.below(3)));
      p.push_back(static_cast<Label>(rng.below(3)));
    }
    gold.push_back(seq("s" + std::to_string(i), g));
    pred.push_back(seq("s" + std::to_string(i), p));
    total += len;
  }
  const LabelReport r = token_prf(gold, pred);
  long tp = 0, fp = 0, fn = 0, support = 0;
  for (const LabelStats& s : r.per_label) {
    tp += s.tp;
    fp += s.fp;
    fn += s.fn;
    support += s.support;
  }
  CHECK(tp + fp == total);  // every predicted token lands once
  CHECK(tp + fn == total);  // every gold token lands once
  CHECK(support == total);

  // weighted F1 sits between the extreme per-label F1 values.
  double lo = 1.0, hi = 0.0;
  for (const LabelStats& s : r.per_label) {
    if (s.support == 0) continue;
    lo = std::min(lo, s.f1);
    hi = std::max(hi, s.f1);
  }
  CHECK(r.weighted_f1 >= lo - 1e-12);
  CHECK(r.weighted_f1 <= hi + 1e-12);

  // Reversing the sentence order changes nothing.
  std::vector<LabeledSequence> gold_rev(gold.rbegin(), gold.rend());
  std::vector<LabeledSequence> pred_rev(pred.rbegin(), pred.rend());
  const LabelReport r2 = token_prf(gold_rev, pred_rev);
  CHECK(r2.weighted_f1 == r.weighted_f1);
  CHECK(r2.macro_f1_all == r.macro_f1_all);
}

TEST_CASE("alignment errors") {
  const std::vector<LabeledSequence> gold{seq("a", {Label::O})};
  CHECK_THROWS_AS(token_prf(gold, {}), ArgumentError);
  CHECK_THROWS_AS(token_prf(gold, {seq("b", {Label::O})}), ArgumentError);
  CHECK_THROWS_AS(token_prf(gold, {seq("a", {Label::O, Label::O})}), ArgumentError);
}

TEST_CASE("BIO repair promotes leading I to B") {
  CHECK(repair_bio({Label::O, Label::I}) == std::vector<Label>{Label::O, Label::B});
  CHECK(repair_bio({Label::I, Label::I}) == std::vector<Label>{Label::B, Label::I});
  CHECK(repair_bio({Label::B, Label::I, Label::O, Label::I}) ==
        std::vector<Label>{Label::B, Label::I, Label::O, Label::B});
  // Already well-formed sequences pass through.
  const std::vector<Label> ok{Label::B, Label::I, Label::I, Label::O};
  CHECK(repair_bio(ok) == ok);
}

TEST_CASE("span extraction") {
  CHECK(extract_spans({Label::B, Label::I, Label::O, Label::B}) ==
        std::vector<std::pair<int, int>>{{0, 2}, {3, 4}});
  CHECK(extract_spans({Label::O, Label::O}).empty());
  CHECK(extract_spans({Label::B, Label::B}) ==
        std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
}

TEST_CASE("exact span matching") {
  SUBCASE("identical span counts as a hit") {
    const std::vector<LabeledSequence> gold{
        seq("a", {Label::O, Label::O, Label::B, Label::I, Label::O})};
    const SpanScore s = span_exact_match(gold, gold);
    CHECK(s.f1 == 1.0);
    CHECK(s.tp == 1);
  }
  SUBCASE("partial overlap scores zero") {
    const std::vector<LabeledSequence> gold{
        seq("a", {Label::O, Label::O, Label::B, Label::I, Label::O})};
    const std::vector<LabeledSequence> pred{
        seq("a", {Label::O, Label::O, Label::B, Label::O, Label::O})};
    const SpanScore s = span_exact_match(gold, pred);
    CHECK(s.tp == 0);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
  }
  SUBCASE("no spans on either side is vacuous agreement") {
    const std::vector<LabeledSequence> gold{seq("a", {Label::O, Label::O})};
    const SpanScore s = span_exact_match(gold, gold);
    CHECK(s.f1 == 1.0);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
  }
}

TEST_CASE("plain-text table renders") {
  const std::vector<LabeledSequence> gold{seq("a", {Label::B, Label::O})};
  const std::string table = report_to_table(token_prf(gold, gold));
  CHECK(table.find("label") != std::string::npos);
  CHECK(table.find("weighted=1.0000") != std::string::npos);
}

TEST_SUITE_END();
