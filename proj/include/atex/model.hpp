#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "atex/bilstm.hpp"
#include "atex/crf.hpp"
#include "atex/dataset.hpp"
#include "atex/encoding.hpp"

namespace atex {

enum class WordSource { random, pretrained, contextual };

std::string_view word_source_name(WordSource s);
WordSource word_source_from_string(std::string_view s);

// Everything that determines the architecture. A checkpoint stores this
// record verbatim; two models with equal configs have identically shaped
// tensors.
struct ModelConfig {
  bool uncased = true;
  bool use_pos = true;
  WordSource word_source = WordSource::random;
  PositionMode position_mode = PositionMode::none;
  int word_dim = 300;
  int pos_dim = 100;
  int pe_dim = 64;
  double pe_constant = 10000;
  int hidden_dim = 128;
  bool forbid_oi = false;
  std::uint64_t seed = 42;
  std::string label_order = "BIO";  // guard constant, must match this build

  int input_dim() const {
    return word_dim + (use_pos ? pos_dim : 0) +
           (position_mode != PositionMode::none ? pe_dim : 0);
  }
  PositionalConfig positional() const { return {position_mode, pe_dim, pe_constant}; }
};

// The complete set of trainable tensors plus the config that shapes them.
struct TaggerModel {
  ModelConfig config;
  EmbeddingTable word_table;  // unused when word_source == contextual
  EmbeddingTable pos_table;   // unused when !use_pos
  LstmParams fwd;
  LstmParams bwd;
  CrfParams crf;

  bool uses_word_table() const { return config.word_source != WordSource::contextual; }
};

// Builds a model from scratch. For word_source == random the word table is
// drawn over `word_vocab`; for pretrained pass the loaded table in
// `pretrained`; for contextual the word pathway is the frozen vector file and
// word_vocab/pretrained are ignored.
TaggerModel build_model(const ModelConfig& config,
                        const std::vector<std::string>& word_vocab,
                        const EmbeddingTable* pretrained = nullptr);

// Vocabulary of all tokens in the dataset, sorted and deduplicated.
std::vector<std::string> collect_vocab(const Dataset& data);

// Gradient of one sentence loss for every trainable tensor. Embedding-table
// gradients are sparse maps row id -> gradient row.
struct ModelGrads {
  BilstmGrads lstm;
  Eigen::MatrixXd emit_weight;
  Eigen::VectorXd emit_bias;
  Eigen::MatrixXd transition;
  Eigen::VectorXd start;
  Eigen::VectorXd end;
  std::map<int, Eigen::VectorXd> word_rows;
  std::map<int, Eigen::VectorXd> pos_rows;

  double squared_norm() const;
  void scale(double factor);
};

// Numeric view of a sentence under a model: the encoded input plus gold
// labels. Throws when the model needs annotations the sentence lacks.
EncodedSentence encode_for_model(const TaggerModel& model, const DataSentence& sentence,
                                 const ContextualStore* contextual);

// NLL of one sentence; fills *grads (overwritten) when non-null.
double sentence_loss(const TaggerModel& model, const DataSentence& sentence,
                     const ContextualStore* contextual, ModelGrads* grads);

// Viterbi labels for one sentence under the model.
std::vector<Label> predict_labels(const TaggerModel& model, const DataSentence& sentence,
                                  const ContextualStore* contextual);

}  // namespace atex
