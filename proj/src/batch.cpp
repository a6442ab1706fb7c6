#include "atex/batch.hpp"

#include <omp.h>

#include "atex/parallel.hpp"

namespace atex {

std::vector<Prediction> predict_batch_serial(const TaggerModel& model, const Dataset& data,
                                             const ContextualStore* contextual) {
  std::vector<Prediction> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    out[i] = {data[i].sentence_id, predict_labels(model, data[i], contextual)};
  }
  return out;
}

std::vector<Prediction> predict_batch(const TaggerModel& model, const Dataset& data,
                                      const ContextualStore* contextual, int jobs) {
  std::vector<Prediction> out(data.size());
  ExceptionCollector errors;
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
    errors.run([&, i] {
      const auto idx = static_cast<std::size_t>(i);
      out[idx] = {data[idx].sentence_id, predict_labels(model, data[idx], contextual)};
    });
  }
  errors.rethrow();
  return out;
}

double dataset_loss_serial(const TaggerModel& model, const Dataset& data,
                           const ContextualStore* contextual) {
  if (data.empty()) return 0;
  std::vector<double> losses(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    losses[i] = sentence_loss(model, data[i], contextual, nullptr);
  }
  double sum = 0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(data.size());
}

double dataset_loss(const TaggerModel& model, const Dataset& data,
                    const ContextualStore* contextual, int jobs) {
  if (data.empty()) return 0;
  // Per-sentence losses land in a fixed slot and are summed in index order
  // afterwards, so the result is bit-identical to the serial path.
  std::vector<double> losses(data.size());
  ExceptionCollector errors;
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
    errors.run([&, i] {
      const auto idx = static_cast<std::size_t>(i);
      losses[idx] = sentence_loss(model, data[idx], contextual, nullptr);
    });
  }
  errors.rethrow();
  double sum = 0;
  for (double l : losses) sum += l;
  return sum / static_cast<double>(data.size());
}

LabelReport evaluate(const TaggerModel& model, const Dataset& data,
                     const ContextualStore* contextual, int jobs) {
  const std::vector<Prediction> preds = predict_batch(model, data, contextual, jobs);
  std::vector<LabeledSequence> gold, pred;
  gold.reserve(data.size());
  pred.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    gold.push_back(data[i].to_labeled());
    pred.push_back({data[i].sentence_id, data[i].tokens, preds[i].labels});
  }
  return token_prf(gold, pred);
}

}  // namespace atex
