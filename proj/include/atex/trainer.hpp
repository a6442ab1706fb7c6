#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "atex/model.hpp"

namespace atex {

enum class Optimizer { sgd, adam };

std::string_view optimizer_name(Optimizer o);
Optimizer optimizer_from_string(std::string_view s);

struct TrainConfig {
  int epochs = 50;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  double clip_norm = 5.0;  // <= 0 disables clipping
  std::uint64_t seed = 42;
  int patience = 10;  // early stopping on dev weighted F1
  bool shuffle = true;
};

struct EpochStats {
  int epoch = 0;         // 1-based
  double mean_loss = 0;  // average sentence NLL over the epoch
  double dev_weighted_f1 = -1;  // -1 when no dev set
};

struct TrainResult {
  TaggerModel model;
  std::vector<EpochStats> history;
  int best_epoch = 0;  // 1-based epoch of the returned model (0 = final)
};

// Per-sentence gradient steps over shuffled training data. With a dev set the
// best-dev-F1 model is returned and training stops early after `patience`
// epochs without improvement; otherwise the final model is returned.
// Deterministic given seeds. Throws TrainError on NaN loss.
TrainResult train(const Dataset& train_data, const Dataset* dev_data, TaggerModel model,
                  const TrainConfig& tcfg, const ContextualStore* contextual = nullptr);

// Compares the analytic gradient of the sentence NLL against central finite
// differences for every trainable coordinate (CRF, both LSTM directions, and
// the looked-up embedding rows). Returns the maximum relative error.
double full_gradient_check(TaggerModel model, const DataSentence& sentence, double eps,
                           const ContextualStore* contextual = nullptr);

// Self-describing binary checkpoint: format version, config record (including
// vocabularies), named float64 tensors, and a trailing checksum.
// load(save(m)) reproduces m bit for bit.
void save_checkpoint(const TaggerModel& model, const std::filesystem::path& path);
TaggerModel load_checkpoint(const std::filesystem::path& path);

}  // namespace atex
