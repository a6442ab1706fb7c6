#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace atex {

class Rng;

// Parameters for one LSTM direction. The 4H rows of w_input / w_recur / bias
// split into four H-rows gate blocks in the fixed order
//   [input gate; forget gate; cell candidate; output gate].
struct LstmParams {
  Eigen::MatrixXd w_input;  // 4H x D_in
  Eigen::MatrixXd w_recur;  // 4H x H
  Eigen::VectorXd bias;     // 4H

  int hidden_size() const { return static_cast<int>(w_recur.cols()); }
  int input_size() const { return static_cast<int>(w_input.cols()); }

  // Uniform [-1/sqrt(H), 1/sqrt(H)] weights, forget-gate bias 1, other
  // biases 0.
  static LstmParams init(int input_dim, int hidden_dim, Rng& rng);
};

// One cell step: gate activations from x and the previous (h, c), producing
// the next (h, c).
void lstm_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
               const Eigen::VectorXd& c, const LstmParams& params,
               Eigen::VectorXd* h_out, Eigen::VectorXd* c_out);

// Per-direction activations saved by the forward pass for backpropagation.
struct LstmTrace {
  Eigen::MatrixXd gates;   // T x 4H, post-activation (i, f, g, o)
  Eigen::MatrixXd cells;   // T x H
  Eigen::MatrixXd hidden;  // T x H
};

struct BilstmTrace {
  LstmTrace fwd, bwd;
};

// Runs both directions from zero initial states and concatenates the hidden
// rows: output row t is [h_fwd(t); h_bwd(t)], a T x 2H matrix.
Eigen::MatrixXd bilstm_forward(const Eigen::MatrixXd& input, const LstmParams& fwd,
                               const LstmParams& bwd, BilstmTrace* trace = nullptr);

struct LstmGrads {
  Eigen::MatrixXd w_input;
  Eigen::MatrixXd w_recur;
  Eigen::VectorXd bias;

  void setZero(const LstmParams& like);
};

struct BilstmGrads {
  LstmGrads fwd, bwd;
};

// Exact gradients for the loss whose gradient w.r.t. the T x 2H feature
// matrix is `upstream`. Returns the gradient w.r.t. the input matrix;
// parameter gradients are accumulated into *grads (overwritten).
Eigen::MatrixXd bilstm_backward(const Eigen::MatrixXd& input, const LstmParams& fwd,
                                const LstmParams& bwd, const BilstmTrace& trace,
                                const Eigen::MatrixXd& upstream, BilstmGrads* grads);

}  // namespace atex
