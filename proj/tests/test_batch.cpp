#include <doctest.h>

#include "atex/batch.hpp"
#include "atex/errors.hpp"
#include "atex/rng.hpp"

using namespace atex;

namespace {

Dataset make_dataset(int sentences, Rng& rng) {
  const std::vector<std::string> vocab{"masa", "pizza", "güzel", "geldi", "çok"};
  Dataset data;
  for (int i = 0; i < sentences; ++i) {
    DataSentence s;
    s.sentence_id = "b" + std::to_string(i);
    const int len = 3 + static_cast<int>(rng.below(6));
    for (int t = 0; t < len; ++t) {
      s.tokens.push_back(vocab[rng.below(vocab.size())]);
      s.upos.emplace_back("NOUN");
      s.levels.push_back(static_cast<int>(rng.below(5)));
      s.labels.push_back(Label::O);
    }
    data.push_back(std::move(s));
  }
  return data;
}

TaggerModel make_model(const Dataset& data) {
  ModelConfig cfg;
  cfg.word_dim = 12;
  cfg.pos_dim = 4;
  cfg.pe_dim = 8;
  cfg.hidden_dim = 6;
  cfg.position_mode = PositionMode::tree;
  return build_model(cfg, collect_vocab(data));
}

}  // namespace

TEST_SUITE_BEGIN("batch");

TEST_CASE("parallel decode reproduces the serial reference bit for bit") {
  Rng rng(61);
  const Dataset data = make_dataset(64, rng);
  const TaggerModel model = make_model(data);

  const auto serial = predict_batch_serial(model, data);
  for (int jobs : {1, 2, 4}) {
    const auto parallel = predict_batch(model, data, nullptr, jobs);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(parallel[i].sentence_id == serial[i].sentence_id);
      CHECK(parallel[i].labels == serial[i].labels);
    }
  }
}

TEST_CASE("parallel dataset loss equals the serial sum exactly") {
  Rng rng(62);
  const Dataset data = make_dataset(40, rng);
  const TaggerModel model = make_model(data);
  const double serial = dataset_loss_serial(model, data);
  for (int jobs : {1, 2, 4}) {
    CHECK(dataset_loss(model, data, nullptr, jobs) == serial);
  }
  CHECK(dataset_loss(model, {}, nullptr, 2) == 0.0);
}

TEST_CASE("evaluate matches token_prf over serial predictions") {
  Rng rng(63);
  Dataset data = make_dataset(20, rng);
  // Plant a few gold B labels so the report is not all-O.
  for (std::size_t i = 0; i < data.size(); i += 3) data[i].labels[0] = Label::B;
  const TaggerModel model = make_model(data);

  const auto preds = predict_batch_serial(model, data);
  std::vector<LabeledSequence> gold, pred;
  for (std::size_t i = 0; i < data.size(); ++i) {
    gold.push_back(data[i].to_labeled());
    pred.push_back({data[i].sentence_id, data[i].tokens, preds[i].labels});
  }
  const LabelReport direct = token_prf(gold, pred);
  const LabelReport via_evaluate = evaluate(model, data, nullptr, 2);
  CHECK(via_evaluate.weighted_f1 == direct.weighted_f1);
  CHECK(via_evaluate.macro_f1_all == direct.macro_f1_all);
  for (int l = 0; l < kNumLabels; ++l) {
    CHECK(via_evaluate.per_label[static_cast<std::size_t>(l)].tp ==
          direct.per_label[static_cast<std::size_t>(l)].tp);
  }
}

TEST_CASE("worker exceptions surface on the calling thread") {
  Rng rng(64);
  Dataset data = make_dataset(8, rng);
  data[5].upos.clear();  // model needs POS tags; this sentence lacks them
  const TaggerModel model = make_model(data);
  CHECK_THROWS_AS(predict_batch(model, data, nullptr, 2), ArgumentError);
}

TEST_SUITE_END();
