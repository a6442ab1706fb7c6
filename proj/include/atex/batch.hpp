#pragma once

#include <string>
#include <vector>

#include "atex/metrics.hpp"
#include "atex/model.hpp"

namespace atex {

struct Prediction {
  std::string sentence_id;
  std::vector<Label> labels;
};

// Serial reference: decodes sentences one by one in order. Kept as the
// ground truth the parallel kernel is checked against.
std::vector<Prediction> predict_batch_serial(const TaggerModel& model, const Dataset& data,
                                             const ContextualStore* contextual = nullptr);

// OpenMP kernel over sentences with a frozen model. Produces exactly the
// serial output; jobs <= 0 uses the OpenMP default thread count.
std::vector<Prediction> predict_batch(const TaggerModel& model, const Dataset& data,
                                      const ContextualStore* contextual = nullptr,
                                      int jobs = 0);

// Mean sentence NLL of the dataset under a frozen model, parallel over
// sentences with an exact (ordered pairwise) reduction.
double dataset_loss_serial(const TaggerModel& model, const Dataset& data,
                           const ContextualStore* contextual = nullptr);
double dataset_loss(const TaggerModel& model, const Dataset& data,
                    const ContextualStore* contextual = nullptr, int jobs = 0);

// Decode + token-level scoring in one call.
LabelReport evaluate(const TaggerModel& model, const Dataset& data,
                     const ContextualStore* contextual = nullptr, int jobs = 0);

}  // namespace atex
