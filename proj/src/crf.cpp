#include "atex/crf.hpp"

#include <cmath>
#include <limits>

#include "atex/errors.hpp"
#include "atex/rng.hpp"

namespace atex {

namespace {

constexpr int kL = kNumLabels;

// log(sum_i exp(v_i)) with the max factored out.
double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf
  return m + std::log((v.array() - m).exp().sum());
}

void check_emissions(const Eigen::MatrixXd& emissions) {
  if (emissions.rows() < 1) throw ArgumentError("emissions must cover at least one token");
  if (emissions.cols() != kL) {
    throw ArgumentError("emissions must have " + std::to_string(kL) + " columns");
  }
}

// Forward scores: alpha(t, y) = log sum of exp-scores of all prefixes ending
// in label y at position t (end score not included).
Eigen::MatrixXd forward_scores(const Eigen::MatrixXd& emissions, const CrfParams& params) {
  const auto t_count = emissions.rows();
  Eigen::MatrixXd alpha(t_count, kL);
  alpha.row(0) = (params.start + emissions.row(0).transpose()).transpose();
  for (Eigen::Index t = 1; t < t_count; ++t) {
    for (int y = 0; y < kL; ++y) {
      Eigen::VectorXd terms = alpha.row(t - 1).transpose() + params.transition.col(y);
      alpha(t, y) = log_sum_exp(terms) + emissions(t, y);
    }
  }
  return alpha;
}

// Backward scores: beta(t, y) = log sum of exp-scores of all suffixes given
// label y at position t (emission at t not included, end score included).
Eigen::MatrixXd backward_scores(const Eigen::MatrixXd& emissions, const CrfParams& params) {
  const auto t_count = emissions.rows();
  Eigen::MatrixXd beta(t_count, kL);
  beta.row(t_count - 1) = params.end.transpose();
  for (Eigen::Index t = t_count - 2; t >= 0; --t) {
    for (int y = 0; y < kL; ++y) {
      Eigen::VectorXd terms = params.transition.row(y).transpose() +
                              emissions.row(t + 1).transpose() +
                              beta.row(t + 1).transpose();
      beta(t, y) = log_sum_exp(terms);
    }
  }
  return beta;
}

}  // namespace

CrfParams CrfParams::init(int feature_dim, Rng& rng) {
  if (feature_dim <= 0) throw ArgumentError("CrfParams::init: feature_dim must be positive");
  CrfParams p;
  p.emit_weight.resize(kL, feature_dim);
  for (Eigen::Index r = 0; r < p.emit_weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.emit_weight.cols(); ++c) {
      p.emit_weight(r, c) = rng.uniform(-0.1, 0.1);
    }
  }
  p.emit_bias = Eigen::VectorXd::Zero(kL);
  p.transition = Eigen::MatrixXd::Zero(kL, kL);
  p.start = Eigen::VectorXd::Zero(kL);
  p.end = Eigen::VectorXd::Zero(kL);
  return p;
}

Eigen::MatrixXd project_emissions(const Eigen::MatrixXd& features, const CrfParams& params) {
  if (features.cols() != params.emit_weight.cols()) {
    throw ArgumentError("project_emissions: feature width " + std::to_string(features.cols()) +
                        " does not match projection width " +
                        std::to_string(params.emit_weight.cols()));
  }
  return (features * params.emit_weight.transpose()).rowwise() +
         params.emit_bias.transpose();
}

Eigen::MatrixXd project_emissions_backward(const Eigen::MatrixXd& features,
                                           const Eigen::MatrixXd& d_emissions,
                                           const CrfParams& params,
                                           Eigen::MatrixXd* d_weight,
                                           Eigen::VectorXd* d_bias) {
  if (d_emissions.rows() != features.rows() || d_emissions.cols() != kL) {
    throw ArgumentError("project_emissions_backward: gradient shape mismatch");
  }
  *d_weight = d_emissions.transpose() * features;
  *d_bias = d_emissions.colwise().sum().transpose();
  return d_emissions * params.emit_weight;
}

double sequence_score(const Eigen::MatrixXd& emissions, const std::vector<Label>& labels,
                      const CrfParams& params) {
  check_emissions(emissions);
  if (static_cast<Eigen::Index>(labels.size()) != emissions.rows()) {
    throw ArgumentError("sequence_score: " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(emissions.rows()) + " tokens");
  }
  double score = params.start(static_cast<int>(labels.front())) +
                 params.end(static_cast<int>(labels.back()));
  for (Eigen::Index t = 0; t < emissions.rows(); ++t) {
    score += emissions(t, static_cast<int>(labels[static_cast<std::size_t>(t)]));
    if (t + 1 < emissions.rows()) {
      score += params.transition(static_cast<int>(labels[static_cast<std::size_t>(t)]),
                                 static_cast<int>(labels[static_cast<std::size_t>(t) + 1]));
    }
  }
  return score;
}

double log_partition(const Eigen::MatrixXd& emissions, const CrfParams& params) {
  check_emissions(emissions);
  const Eigen::MatrixXd alpha = forward_scores(emissions, params);
  Eigen::VectorXd last = alpha.row(emissions.rows() - 1).transpose() + params.end;
  return log_sum_exp(last);
}

double nll_loss(const Eigen::MatrixXd& emissions, const std::vector<Label>& gold,
                const CrfParams& params, CrfGrads* grads) {
  check_emissions(emissions);
  const auto t_count = emissions.rows();
  if (static_cast<Eigen::Index>(gold.size()) != t_count) {
    throw ArgumentError("nll_loss: " + std::to_string(gold.size()) + " labels for " +
                        std::to_string(t_count) + " tokens");
  }

  const Eigen::MatrixXd alpha = forward_scores(emissions, params);
  const double log_z = log_sum_exp(alpha.row(t_count - 1).transpose() + params.end);
  const double gold_score = sequence_score(emissions, gold, params);
  const double loss = log_z - gold_score;
  if (grads == nullptr) return loss;

  const Eigen::MatrixXd beta = backward_scores(emissions, params);

  // Unary marginals: P(y at t) = exp(alpha + beta - log Z).
  Eigen::MatrixXd marginal = (alpha + beta).array() - log_z;
  marginal = marginal.array().exp();

  grads->emissions = marginal;
  grads->start = marginal.row(0).transpose();
  grads->end = marginal.row(t_count - 1).transpose();
  grads->transition = Eigen::MatrixXd::Zero(kL, kL);

  // Pairwise marginals accumulate into the transition gradient.
  for (Eigen::Index t = 0; t + 1 < t_count; ++t) {
    for (int a = 0; a < kL; ++a) {
      for (int b = 0; b < kL; ++b) {
        const double lp = alpha(t, a) + params.transition(a, b) + emissions(t + 1, b) +
                          beta(t + 1, b) - log_z;
        grads->transition(a, b) += std::exp(lp);
      }
    }
  }

  // Subtract the gold indicator counts.
  for (Eigen::Index t = 0; t < t_count; ++t) {
    grads->emissions(t, static_cast<int>(gold[static_cast<std::size_t>(t)])) -= 1.0;
    if (t + 1 < t_count) {
      grads->transition(static_cast<int>(gold[static_cast<std::size_t>(t)]),
                        static_cast<int>(gold[static_cast<std::size_t>(t) + 1])) -= 1.0;
    }
  }
  grads->start(static_cast<int>(gold.front())) -= 1.0;
  grads->end(static_cast<int>(gold.back())) -= 1.0;
  return loss;
}

std::pair<std::vector<Label>, double> viterbi_decode(const Eigen::MatrixXd& emissions,
                                                     const CrfParams& params) {
  check_emissions(emissions);
  const auto t_count = emissions.rows();

  Eigen::MatrixXd best(t_count, kL);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> back(t_count, kL);
  best.row(0) = (params.start + emissions.row(0).transpose()).transpose();

  for (Eigen::Index t = 1; t < t_count; ++t) {
    for (int y = 0; y < kL; ++y) {
      double top = -std::numeric_limits<double>::infinity();
      int arg = 0;
      // Ascending scan with strict '>' keeps the lowest label index on ties.
      for (int prev = 0; prev < kL; ++prev) {
        const double s = best(t - 1, prev) + params.transition(prev, y);
        if (s > top) {
          top = s;
          arg = prev;
        }
      }
      best(t, y) = top + emissions(t, y);
      back(t, y) = arg;
    }
  }

  double top = -std::numeric_limits<double>::infinity();
  int last = 0;
  for (int y = 0; y < kL; ++y) {
    const double s = best(t_count - 1, y) + params.end(y);
    if (s > top) {
      top = s;
      last = y;
    }
  }

  std::vector<Label> labels(static_cast<std::size_t>(t_count));
  labels[static_cast<std::size_t>(t_count) - 1] = static_cast<Label>(last);
  for (Eigen::Index t = t_count - 1; t > 0; --t) {
    last = back(t, last);
    labels[static_cast<std::size_t>(t) - 1] = static_cast<Label>(last);
  }
  return {std::move(labels), top};
}

}  // namespace atex
