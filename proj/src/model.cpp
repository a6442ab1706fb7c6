#include "atex/model.hpp"

#include <algorithm>
#include <set>

#include "atex/deptree.hpp"
#include "atex/errors.hpp"
#include "atex/rng.hpp"

namespace atex {

std::string_view word_source_name(WordSource s) {
  switch (s) {
    case WordSource::random: return "random";
    case WordSource::pretrained: return "pretrained";
    case WordSource::contextual: return "contextual";
  }
  return "?";
}

WordSource word_source_from_string(std::string_view s) {
  if (s == "random") return WordSource::random;
  if (s == "pretrained") return WordSource::pretrained;
  if (s == "contextual") return WordSource::contextual;
  throw ArgumentError("unknown word source \"" + std::string(s) + "\"");
}

TaggerModel build_model(const ModelConfig& config,
                        const std::vector<std::string>& word_vocab,
                        const EmbeddingTable* pretrained) {
  if (config.label_order != "BIO") {
    throw ArgumentError("model label order must be BIO");
  }
  TaggerModel model;
  model.config = config;

  Rng rng(config.seed);
  switch (config.word_source) {
    case WordSource::random:
      if (word_vocab.empty()) throw ArgumentError("build_model: empty word vocabulary");
      model.word_table = init_random_table(word_vocab, config.word_dim, rng.next());
      break;
    case WordSource::pretrained: {
      if (pretrained == nullptr) throw ArgumentError("build_model: missing pretrained table");
      model.word_table = *pretrained;
      model.config.word_dim = model.word_table.dim;
      break;
    }
    case WordSource::contextual:
      break;  // word vectors come per sentence from the contextual store
  }

  if (config.use_pos) {
    std::vector<std::string> pos_vocab(kUposTags.begin(), kUposTags.end());
    model.pos_table = init_random_table(pos_vocab, config.pos_dim, rng.next());
  }

  const int d_in = model.config.input_dim();
  model.fwd = LstmParams::init(d_in, config.hidden_dim, rng);
  model.bwd = LstmParams::init(d_in, config.hidden_dim, rng);
  model.crf = CrfParams::init(2 * config.hidden_dim, rng);
  if (config.forbid_oi) {
    model.crf.transition(static_cast<int>(Label::O), static_cast<int>(Label::I)) =
        kForbiddenScore;
  }
  return model;
}

std::vector<std::string> collect_vocab(const Dataset& data) {
  std::set<std::string> uniq;
  for (const DataSentence& s : data) uniq.insert(s.tokens.begin(), s.tokens.end());
  return {uniq.begin(), uniq.end()};
}

double ModelGrads::squared_norm() const {
  double n = lstm.fwd.w_input.squaredNorm() + lstm.fwd.w_recur.squaredNorm() +
             lstm.fwd.bias.squaredNorm() + lstm.bwd.w_input.squaredNorm() +
             lstm.bwd.w_recur.squaredNorm() + lstm.bwd.bias.squaredNorm() +
             emit_weight.squaredNorm() + emit_bias.squaredNorm() +
             transition.squaredNorm() + start.squaredNorm() + end.squaredNorm();
  for (const auto& [id, row] : word_rows) n += row.squaredNorm();
  for (const auto& [id, row] : pos_rows) n += row.squaredNorm();
  return n;
}

void ModelGrads::scale(double factor) {
  lstm.fwd.w_input *= factor;
  lstm.fwd.w_recur *= factor;
  lstm.fwd.bias *= factor;
  lstm.bwd.w_input *= factor;
  lstm.bwd.w_recur *= factor;
  lstm.bwd.bias *= factor;
  emit_weight *= factor;
  emit_bias *= factor;
  transition *= factor;
  start *= factor;
  end *= factor;
  for (auto& [id, row] : word_rows) row *= factor;
  for (auto& [id, row] : pos_rows) row *= factor;
}

EncodedSentence encode_for_model(const TaggerModel& model, const DataSentence& sentence,
                                 const ContextualStore* contextual) {
  const ModelConfig& cfg = model.config;
  const Eigen::MatrixXd* ctx = nullptr;
  if (cfg.word_source == WordSource::contextual) {
    if (contextual == nullptr) {
      throw ArgumentError("model expects contextual vectors but none were supplied");
    }
    ctx = contextual->find(sentence.sentence_id);
    if (ctx == nullptr) {
      throw ArgumentError("no contextual vectors for sentence " + sentence.sentence_id);
    }
    if (ctx->cols() != cfg.word_dim) {
      throw ArgumentError("contextual vectors for sentence " + sentence.sentence_id +
                          " have dim " + std::to_string(ctx->cols()) + ", expected " +
                          std::to_string(cfg.word_dim));
    }
  }
  if (cfg.use_pos && sentence.upos.size() != sentence.tokens.size()) {
    throw ArgumentError("sentence " + sentence.sentence_id +
                        " lacks POS tags required by the model");
  }
  if (cfg.position_mode == PositionMode::tree && !sentence.has_tree()) {
    throw ArgumentError("sentence " + sentence.sentence_id +
                        " lacks level indices required by tree positional encoding");
  }
  return encode_sentence(sentence.sentence_id, sentence.tokens, sentence.upos,
                         sentence.levels, model.uses_word_table() ? &model.word_table : nullptr,
                         cfg.use_pos ? &model.pos_table : nullptr, cfg.positional(), ctx);
}

double sentence_loss(const TaggerModel& model, const DataSentence& sentence,
                     const ContextualStore* contextual, ModelGrads* grads) {
  if (sentence.tokens.empty()) {
    throw ArgumentError("sentence " + sentence.sentence_id + " has no tokens");
  }
  const EncodedSentence enc = encode_for_model(model, sentence, contextual);

  BilstmTrace trace;
  const Eigen::MatrixXd features = bilstm_forward(enc.matrix, model.fwd, model.bwd, &trace);
  const Eigen::MatrixXd emissions = project_emissions(features, model.crf);

  if (grads == nullptr) {
    return nll_loss(emissions, sentence.labels, model.crf, nullptr);
  }

  CrfGrads crf_grads;
  const double loss = nll_loss(emissions, sentence.labels, model.crf, &crf_grads);

  Eigen::MatrixXd d_features = project_emissions_backward(
      features, crf_grads.emissions, model.crf, &grads->emit_weight, &grads->emit_bias);
  grads->transition = std::move(crf_grads.transition);
  grads->start = std::move(crf_grads.start);
  grads->end = std::move(crf_grads.end);
  if (model.config.forbid_oi) {
    // The masked transition is a constant, not a parameter.
    grads->transition(static_cast<int>(Label::O), static_cast<int>(Label::I)) = 0.0;
  }

  const Eigen::MatrixXd d_input =
      bilstm_backward(enc.matrix, model.fwd, model.bwd, trace, d_features, &grads->lstm);

  // Scatter the input gradient into the looked-up table rows.
  grads->word_rows.clear();
  grads->pos_rows.clear();
  int col = 0;
  if (model.uses_word_table()) {
    if (model.word_table.trainable) {
      for (Eigen::Index t = 0; t < d_input.rows(); ++t) {
        const int wid = enc.word_ids[static_cast<std::size_t>(t)];
        auto [it, fresh] = grads->word_rows.try_emplace(
            wid, Eigen::VectorXd::Zero(model.config.word_dim));
        it->second += d_input.row(t).segment(0, model.config.word_dim).transpose();
      }
    }
    col += model.config.word_dim;
  } else {
    col += model.config.word_dim;  // frozen contextual block, no gradient
  }
  if (model.config.use_pos) {
    if (model.pos_table.trainable) {
      for (Eigen::Index t = 0; t < d_input.rows(); ++t) {
        const int pid = enc.pos_ids[static_cast<std::size_t>(t)];
        auto [it, fresh] = grads->pos_rows.try_emplace(
            pid, Eigen::VectorXd::Zero(model.config.pos_dim));
        it->second += d_input.row(t).segment(col, model.config.pos_dim).transpose();
      }
    }
  }
  // The positional-encoding block is a deterministic function of position,
  // not a parameter; its gradient slice is dropped.
  return loss;
}

std::vector<Label> predict_labels(const TaggerModel& model, const DataSentence& sentence,
                                  const ContextualStore* contextual) {
  const EncodedSentence enc = encode_for_model(model, sentence, contextual);
  const Eigen::MatrixXd features = bilstm_forward(enc.matrix, model.fwd, model.bwd);
  const Eigen::MatrixXd emissions = project_emissions(features, model.crf);
  return viterbi_decode(emissions, model.crf).first;
}

}  // namespace atex
