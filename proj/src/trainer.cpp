#include "atex/trainer.hpp"

#include <cmath>
#include <functional>

#include "atex/errors.hpp"
#include "atex/metrics.hpp"
#include "atex/rng.hpp"

namespace atex {

std::string_view optimizer_name(Optimizer o) {
  return o == Optimizer::sgd ? "sgd" : "adam";
}

Optimizer optimizer_from_string(std::string_view s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "adam") return Optimizer::adam;
  throw ArgumentError("unknown optimizer \"" + std::string(s) + "\"");
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// First/second Adam moments for one dense tensor.
struct MomentPair {
  Eigen::MatrixXd m, v;
  long step = 0;

  void init(Eigen::Index rows, Eigen::Index cols) {
    m = Eigen::MatrixXd::Zero(rows, cols);
    v = Eigen::MatrixXd::Zero(rows, cols);
  }
};

// Moments for an embedding table. Rows step independently so that rows the
// current sentence never touched stay bit-identical.
struct TableMoments {
  Eigen::MatrixXd m, v;
  std::vector<long> row_step;

  void init(Eigen::Index rows, Eigen::Index cols) {
    m = Eigen::MatrixXd::Zero(rows, cols);
    v = Eigen::MatrixXd::Zero(rows, cols);
    row_step.assign(static_cast<std::size_t>(rows), 0);
  }
};

class OptimizerState {
 public:
  OptimizerState(const TaggerModel& model, const TrainConfig& tcfg) : tcfg_(tcfg) {
    fwd_w_.init(model.fwd.w_input.rows(), model.fwd.w_input.cols());
    fwd_u_.init(model.fwd.w_recur.rows(), model.fwd.w_recur.cols());
    fwd_b_.init(model.fwd.bias.size(), 1);
    bwd_w_.init(model.bwd.w_input.rows(), model.bwd.w_input.cols());
    bwd_u_.init(model.bwd.w_recur.rows(), model.bwd.w_recur.cols());
    bwd_b_.init(model.bwd.bias.size(), 1);
    emit_w_.init(model.crf.emit_weight.rows(), model.crf.emit_weight.cols());
    emit_b_.init(model.crf.emit_bias.size(), 1);
    trans_.init(kNumLabels, kNumLabels);
    start_.init(kNumLabels, 1);
    end_.init(kNumLabels, 1);
    if (model.uses_word_table() && model.word_table.trainable) {
      word_.init(model.word_table.vectors.rows(), model.word_table.vectors.cols());
    }
    if (model.config.use_pos && model.pos_table.trainable) {
      pos_.init(model.pos_table.vectors.rows(), model.pos_table.vectors.cols());
    }
  }

  void apply(TaggerModel& model, ModelGrads& grads) {
    if (tcfg_.clip_norm > 0) {
      const double norm = std::sqrt(grads.squared_norm());
      if (norm > tcfg_.clip_norm) grads.scale(tcfg_.clip_norm / norm);
    }
    dense(model.fwd.w_input, grads.lstm.fwd.w_input, fwd_w_);
    dense(model.fwd.w_recur, grads.lstm.fwd.w_recur, fwd_u_);
    dense_vec(model.fwd.bias, grads.lstm.fwd.bias, fwd_b_);
    dense(model.bwd.w_input, grads.lstm.bwd.w_input, bwd_w_);
    dense(model.bwd.w_recur, grads.lstm.bwd.w_recur, bwd_u_);
    dense_vec(model.bwd.bias, grads.lstm.bwd.bias, bwd_b_);
    dense(model.crf.emit_weight, grads.emit_weight, emit_w_);
    dense_vec(model.crf.emit_bias, grads.emit_bias, emit_b_);
    dense(model.crf.transition, grads.transition, trans_);
    dense_vec(model.crf.start, grads.start, start_);
    dense_vec(model.crf.end, grads.end, end_);
    for (auto& [row, g] : grads.word_rows) table_row(model.word_table, row, g, word_);
    for (auto& [row, g] : grads.pos_rows) table_row(model.pos_table, row, g, pos_);
    if (model.config.forbid_oi) {
      model.crf.transition(static_cast<int>(Label::O), static_cast<int>(Label::I)) =
          kForbiddenScore;
    }
  }

 private:
  void dense(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, MomentPair& mom) {
    if (tcfg_.optimizer == Optimizer::sgd) {
      param -= tcfg_.learning_rate * grad;
      return;
    }
    ++mom.step;
    mom.m = kAdamBeta1 * mom.m + (1 - kAdamBeta1) * grad;
    mom.v = kAdamBeta2 * mom.v + (1 - kAdamBeta2) * grad.cwiseProduct(grad);
    const double c1 = 1 - std::pow(kAdamBeta1, static_cast<double>(mom.step));
    const double c2 = 1 - std::pow(kAdamBeta2, static_cast<double>(mom.step));
    param.array() -= tcfg_.learning_rate * (mom.m.array() / c1) /
                     ((mom.v.array() / c2).sqrt() + kAdamEps);
  }

  void dense_vec(Eigen::VectorXd& param, const Eigen::VectorXd& grad, MomentPair& mom) {
    Eigen::MatrixXd p = param;
    dense(p, grad, mom);
    param = p;
  }

  void table_row(EmbeddingTable& table, int row, const Eigen::VectorXd& grad,
                 TableMoments& mom) {
    if (tcfg_.optimizer == Optimizer::sgd) {
      table.vectors.row(row) -= tcfg_.learning_rate * grad.transpose();
      return;
    }
    long& step = mom.row_step[static_cast<std::size_t>(row)];
    ++step;
    mom.m.row(row) = kAdamBeta1 * mom.m.row(row) + (1 - kAdamBeta1) * grad.transpose();
    mom.v.row(row) = kAdamBeta2 * mom.v.row(row) +
                     (1 - kAdamBeta2) * grad.cwiseProduct(grad).transpose();
    const double c1 = 1 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double c2 = 1 - std::pow(kAdamBeta2, static_cast<double>(step));
    table.vectors.row(row).array() -= tcfg_.learning_rate * (mom.m.row(row).array() / c1) /
                                      ((mom.v.row(row).array() / c2).sqrt() + kAdamEps);
  }

  TrainConfig tcfg_;
  MomentPair fwd_w_, fwd_u_, fwd_b_, bwd_w_, bwd_u_, bwd_b_;
  MomentPair emit_w_, emit_b_, trans_, start_, end_;
  TableMoments word_, pos_;
};

double dev_weighted_f1(const TaggerModel& model, const Dataset& dev,
                       const ContextualStore* contextual) {
  std::vector<LabeledSequence> gold, pred;
  gold.reserve(dev.size());
  pred.reserve(dev.size());
  for (const DataSentence& s : dev) {
    gold.push_back(s.to_labeled());
    pred.push_back({s.sentence_id, s.tokens, predict_labels(model, s, contextual)});
  }
  return token_prf(gold, pred).weighted_f1;
}

}  // namespace

TrainResult train(const Dataset& train_data, const Dataset* dev_data, TaggerModel model,
                  const TrainConfig& tcfg, const ContextualStore* contextual) {
  if (train_data.empty()) throw ArgumentError("train: empty training data");
  if (tcfg.epochs < 1) throw ArgumentError("train: epochs must be >= 1");
  if (tcfg.learning_rate < 0) throw ArgumentError("train: negative learning rate");
  for (const DataSentence& s : train_data) {
    if (!is_well_formed_bio(s.labels)) {
      throw ArgumentError("train: sentence " + s.sentence_id + " has ill-formed BIO labels");
    }
  }

  OptimizerState opt(model, tcfg);
  Rng shuffle_rng(tcfg.seed);
  std::vector<std::size_t> order(train_data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  TaggerModel best_model = model;
  double best_f1 = -1;
  int best_epoch = 0;
  int since_best = 0;

  ModelGrads grads;
  for (int epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    if (tcfg.shuffle) shuffle_rng.shuffle(order);
    double loss_sum = 0;
    for (std::size_t idx : order) {
      const DataSentence& sentence = train_data[idx];
      const double loss = sentence_loss(model, sentence, contextual, &grads);
      if (!std::isfinite(loss)) {
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) +
                         ", sentence " + sentence.sentence_id);
      }
      opt.apply(model, grads);
      loss_sum += loss;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(train_data.size());
    if (dev_data != nullptr) {
      stats.dev_weighted_f1 = dev_weighted_f1(model, *dev_data, contextual);
      if (stats.dev_weighted_f1 > best_f1) {
        best_f1 = stats.dev_weighted_f1;
        best_model = model;
        best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(stats);
    if (dev_data != nullptr && tcfg.patience > 0 && since_best >= tcfg.patience) break;
  }

  if (dev_data != nullptr && best_epoch > 0) {
    result.model = std::move(best_model);
    result.best_epoch = best_epoch;
  } else {
    result.model = std::move(model);
    result.best_epoch = 0;
  }
  return result;
}

double full_gradient_check(TaggerModel model, const DataSentence& sentence, double eps,
                           const ContextualStore* contextual) {
  if (eps <= 0) throw ArgumentError("full_gradient_check: eps must be positive");

  ModelGrads analytic;
  sentence_loss(model, sentence, contextual, &analytic);

  const auto loss_at = [&]() { return sentence_loss(model, sentence, contextual, nullptr); };

  // Relative error with an absolute floor: differences below 1e-8 are inside
  // central-difference noise for double precision and count as exact.
  double max_rel = 0;
  const auto check_coord = [&](double* coord, double analytic_grad) {
    const double saved = *coord;
    *coord = saved + eps;
    const double plus = loss_at();
    *coord = saved - eps;
    const double minus = loss_at();
    *coord = saved;
    const double numeric = (plus - minus) / (2 * eps);
    const double diff = std::abs(analytic_grad - numeric);
    if (diff < 1e-8) return;
    const double rel = diff / std::max(std::abs(analytic_grad), std::abs(numeric));
    if (rel > max_rel) max_rel = rel;
  };

  const auto check_dense = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      check_coord(param.data() + i, grad.data()[i]);
    }
  };
  const auto check_vec = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      check_coord(param.data() + i, grad(i));
    }
  };

  check_dense(model.fwd.w_input, analytic.lstm.fwd.w_input);
  check_dense(model.fwd.w_recur, analytic.lstm.fwd.w_recur);
  check_vec(model.fwd.bias, analytic.lstm.fwd.bias);
  check_dense(model.bwd.w_input, analytic.lstm.bwd.w_input);
  check_dense(model.bwd.w_recur, analytic.lstm.bwd.w_recur);
  check_vec(model.bwd.bias, analytic.lstm.bwd.bias);
  check_dense(model.crf.emit_weight, analytic.emit_weight);
  check_vec(model.crf.emit_bias, analytic.emit_bias);
  check_vec(model.crf.start, analytic.start);
  check_vec(model.crf.end, analytic.end);
  for (int a = 0; a < kNumLabels; ++a) {
    for (int b = 0; b < kNumLabels; ++b) {
      if (model.config.forbid_oi && a == static_cast<int>(Label::O) &&
          b == static_cast<int>(Label::I)) {
        continue;  // masked constant
      }
      check_coord(&model.crf.transition(a, b), analytic.transition(a, b));
    }
  }
  for (const auto& [row, grad] : analytic.word_rows) {
    for (int c = 0; c < model.config.word_dim; ++c) {
      check_coord(&model.word_table.vectors(row, c), grad(c));
    }
  }
  for (const auto& [row, grad] : analytic.pos_rows) {
    for (int c = 0; c < model.config.pos_dim; ++c) {
      check_coord(&model.pos_table.vectors(row, c), grad(c));
    }
  }
  return max_rel;
}

}  // namespace atex
