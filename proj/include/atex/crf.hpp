#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "atex/corpus.hpp"

namespace atex {

class Rng;

// Score that effectively forbids a transition while keeping the math finite.
inline constexpr double kForbiddenScore = -1e30;

// Linear-chain CRF over the three BIO labels. Scores are unnormalized
// log-potentials; `transition(y, y2)` scores moving from label y to y2, and
// `start` / `end` score the boundary labels.
struct CrfParams {
  Eigen::MatrixXd emit_weight;  // L x 2H
  Eigen::VectorXd emit_bias;    // L
  Eigen::MatrixXd transition;   // L x L
  Eigen::VectorXd start;        // L
  Eigen::VectorXd end;          // L

  int feature_size() const { return static_cast<int>(emit_weight.cols()); }

  // Uniform [-0.1, 0.1] emission projection; transitions and boundary scores
  // start at zero (the boundary-free model).
  static CrfParams init(int feature_dim, Rng& rng);
};

// Per-token label scores: row t = emit_weight * features(t) + emit_bias.
Eigen::MatrixXd project_emissions(const Eigen::MatrixXd& features, const CrfParams& params);

// Backward of the emission projection: accumulates dW/db and returns the
// feature gradient.
Eigen::MatrixXd project_emissions_backward(const Eigen::MatrixXd& features,
                                           const Eigen::MatrixXd& d_emissions,
                                           const CrfParams& params,
                                           Eigen::MatrixXd* d_weight,
                                           Eigen::VectorXd* d_bias);

// Unnormalized score of one labeling:
// start[y_0] + sum_t emissions(t, y_t) + sum_t transition(y_t, y_{t+1}) + end[y_last].
double sequence_score(const Eigen::MatrixXd& emissions, const std::vector<Label>& labels,
                      const CrfParams& params);

// log sum over all L^T labelings of exp(sequence_score), via the forward
// algorithm in log space.
double log_partition(const Eigen::MatrixXd& emissions, const CrfParams& params);

struct CrfGrads {
  Eigen::MatrixXd emissions;   // T x L
  Eigen::MatrixXd transition;  // L x L
  Eigen::VectorXd start;       // L
  Eigen::VectorXd end;         // L
};

// Negative log-likelihood of the gold labeling. When grads is non-null it is
// filled with exact gradients computed from forward-backward marginals.
double nll_loss(const Eigen::MatrixXd& emissions, const std::vector<Label>& gold,
                const CrfParams& params, CrfGrads* grads = nullptr);

// Highest-scoring labeling and its score. Ties prefer the lowest label index
// (B < I < O) at every backtracking step.
std::pair<std::vector<Label>, double> viterbi_decode(const Eigen::MatrixXd& emissions,
                                                     const CrfParams& params);

}  // namespace atex
