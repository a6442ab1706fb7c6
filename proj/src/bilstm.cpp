#include "atex/bilstm.hpp"

#include <cmath>

#include "atex/errors.hpp"
#include "atex/rng.hpp"

namespace atex {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Applies the gate nonlinearities in place to a 4H pre-activation vector:
// sigmoid on the i/f/o blocks, tanh on the g block.
void activate_gates(Eigen::VectorXd& pre, int h) {
  for (int k = 0; k < 4 * h; ++k) {
    const bool is_candidate = k >= 2 * h && k < 3 * h;
    pre(k) = is_candidate ? std::tanh(pre(k)) : sigmoid(pre(k));
  }
}

// Single-direction forward over rows step_order[0..T-1] of the input.
void run_direction(const Eigen::MatrixXd& input, const LstmParams& params,
                   bool reversed, LstmTrace* trace) {
  const auto t_count = input.rows();
  const int h = params.hidden_size();

  // Input contribution for all steps in one product.
  Eigen::MatrixXd pre_x = input * params.w_input.transpose();  // T x 4H

  trace->gates.resize(t_count, 4 * h);
  trace->cells.resize(t_count, h);
  trace->hidden.resize(t_count, h);

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
  for (Eigen::Index step = 0; step < t_count; ++step) {
    const Eigen::Index t = reversed ? t_count - 1 - step : step;
    Eigen::VectorXd pre = pre_x.row(t).transpose() + params.w_recur * h_prev + params.bias;
    activate_gates(pre, h);
    const auto i = pre.segment(0, h);
    const auto f = pre.segment(h, h);
    const auto g = pre.segment(2 * h, h);
    const auto o = pre.segment(3 * h, h);

    Eigen::VectorXd c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
    Eigen::VectorXd h_new = o.cwiseProduct(c.array().tanh().matrix());

    trace->gates.row(t) = pre.transpose();
    trace->cells.row(t) = c.transpose();
    trace->hidden.row(t) = h_new.transpose();
    h_prev = std::move(h_new);
    c_prev = std::move(c);
  }
}

// Single-direction backward; returns the T x D_in input gradient
// contribution and fills *grads.
Eigen::MatrixXd backprop_direction(const Eigen::MatrixXd& input, const LstmParams& params,
                                   const LstmTrace& trace, bool reversed,
                                   const Eigen::MatrixXd& upstream_h, LstmGrads* grads) {
  const auto t_count = input.rows();
  const int h = params.hidden_size();

  Eigen::MatrixXd d_pre(t_count, 4 * h);  // pre-activation gradients per step
  Eigen::VectorXd dh_rec = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_rec = Eigen::VectorXd::Zero(h);

  // Walk the steps in reverse processing order.
  for (Eigen::Index step = t_count - 1; step >= 0; --step) {
    const Eigen::Index t = reversed ? t_count - 1 - step : step;
    const Eigen::Index t_prev_step = step - 1;
    const Eigen::Index t_prev = reversed ? t_count - step : t_prev_step;  // index of h_{t-1}

    const auto gates = trace.gates.row(t);
    const auto i = gates.segment(0, h);
    const auto f = gates.segment(h, h);
    const auto g = gates.segment(2 * h, h);
    const auto o = gates.segment(3 * h, h);
    const Eigen::ArrayXd tanh_c = trace.cells.row(t).transpose().array().tanh();

    const Eigen::ArrayXd dh = upstream_h.row(t).transpose().array() + dh_rec.array();
    const Eigen::ArrayXd d_o = dh * tanh_c;
    const Eigen::ArrayXd dc = dh * o.transpose().array() * (1.0 - tanh_c.square()) + dc_rec.array();

    Eigen::ArrayXd c_prev(h);
    if (step == 0) {
      c_prev.setZero();
    } else {
      c_prev = trace.cells.row(t_prev).transpose().array();
    }
    const Eigen::ArrayXd d_i = dc * g.transpose().array();
    const Eigen::ArrayXd d_f = dc * c_prev;
    const Eigen::ArrayXd d_g = dc * i.transpose().array();
    dc_rec = (dc * f.transpose().array()).matrix();

    // Through the nonlinearities.
    Eigen::VectorXd dp(4 * h);
    dp.segment(0, h) = (d_i * i.transpose().array() * (1.0 - i.transpose().array())).matrix();
    dp.segment(h, h) = (d_f * f.transpose().array() * (1.0 - f.transpose().array())).matrix();
    dp.segment(2 * h, h) = (d_g * (1.0 - g.transpose().array().square())).matrix();
    dp.segment(3 * h, h) = (d_o * o.transpose().array() * (1.0 - o.transpose().array())).matrix();

    d_pre.row(t) = dp.transpose();
    dh_rec = params.w_recur.transpose() * dp;
  }

  // Batched parameter gradients. h_prev rows: zero for the first processed
  // step, the previous step's hidden state otherwise.
  Eigen::MatrixXd h_prev_rows = Eigen::MatrixXd::Zero(t_count, h);
  for (Eigen::Index step = 1; step < t_count; ++step) {
    const Eigen::Index t = reversed ? t_count - 1 - step : step;
    const Eigen::Index prev = reversed ? t + 1 : t - 1;
    h_prev_rows.row(t) = trace.hidden.row(prev);
  }

  grads->w_input = d_pre.transpose() * input;
  grads->w_recur = d_pre.transpose() * h_prev_rows;
  grads->bias = d_pre.colwise().sum().transpose();
  return d_pre * params.w_input;
}

}  // namespace

LstmParams LstmParams::init(int input_dim, int hidden_dim, Rng& rng) {
  if (input_dim <= 0 || hidden_dim <= 0) {
    throw ArgumentError("LstmParams::init: dimensions must be positive");
  }
  LstmParams p;
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  p.w_input.resize(4 * hidden_dim, input_dim);
  p.w_recur.resize(4 * hidden_dim, hidden_dim);
  p.bias = Eigen::VectorXd::Zero(4 * hidden_dim);
  for (Eigen::Index r = 0; r < p.w_input.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.w_input.cols(); ++c) p.w_input(r, c) = rng.uniform(-bound, bound);
  }
  for (Eigen::Index r = 0; r < p.w_recur.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.w_recur.cols(); ++c) p.w_recur(r, c) = rng.uniform(-bound, bound);
  }
  p.bias.segment(hidden_dim, hidden_dim).setOnes();  // forget gate starts open
  return p;
}

void lstm_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h,
               const Eigen::VectorXd& c, const LstmParams& params,
               Eigen::VectorXd* h_out, Eigen::VectorXd* c_out) {
  const int hidden = params.hidden_size();
  if (x.size() != params.input_size()) {
    throw ArgumentError("lstm_cell: input has " + std::to_string(x.size()) +
                        " entries, expected " + std::to_string(params.input_size()));
  }
  if (h.size() != hidden || c.size() != hidden) {
    throw ArgumentError("lstm_cell: state size mismatch");
  }
  Eigen::VectorXd pre = params.w_input * x + params.w_recur * h + params.bias;
  activate_gates(pre, hidden);
  const auto i = pre.segment(0, hidden);
  const auto f = pre.segment(hidden, hidden);
  const auto g = pre.segment(2 * hidden, hidden);
  const auto o = pre.segment(3 * hidden, hidden);
  *c_out = f.cwiseProduct(c) + i.cwiseProduct(g);
  *h_out = o.cwiseProduct(c_out->array().tanh().matrix());
}

Eigen::MatrixXd bilstm_forward(const Eigen::MatrixXd& input, const LstmParams& fwd,
                               const LstmParams& bwd, BilstmTrace* trace) {
  if (input.rows() < 1) throw ArgumentError("bilstm_forward: empty input");
  if (input.cols() != fwd.input_size() || input.cols() != bwd.input_size()) {
    throw ArgumentError("bilstm_forward: input width " + std::to_string(input.cols()) +
                        " does not match parameters");
  }
  BilstmTrace local;
  BilstmTrace* tr = trace != nullptr ? trace : &local;
  run_direction(input, fwd, /*reversed=*/false, &tr->fwd);
  run_direction(input, bwd, /*reversed=*/true, &tr->bwd);

  const int h_fwd = fwd.hidden_size();
  const int h_bwd = bwd.hidden_size();
  Eigen::MatrixXd features(input.rows(), h_fwd + h_bwd);
  features.leftCols(h_fwd) = tr->fwd.hidden;
  features.rightCols(h_bwd) = tr->bwd.hidden;
  return features;
}

void LstmGrads::setZero(const LstmParams& like) {
  w_input = Eigen::MatrixXd::Zero(like.w_input.rows(), like.w_input.cols());
  w_recur = Eigen::MatrixXd::Zero(like.w_recur.rows(), like.w_recur.cols());
  bias = Eigen::VectorXd::Zero(like.bias.size());
}

Eigen::MatrixXd bilstm_backward(const Eigen::MatrixXd& input, const LstmParams& fwd,
                                const LstmParams& bwd, const BilstmTrace& trace,
                                const Eigen::MatrixXd& upstream, BilstmGrads* grads) {
  const int h_fwd = fwd.hidden_size();
  const int h_bwd = bwd.hidden_size();
  if (upstream.rows() != input.rows() || upstream.cols() != h_fwd + h_bwd) {
    throw ArgumentError("bilstm_backward: upstream gradient shape mismatch");
  }
  Eigen::MatrixXd d_input =
      backprop_direction(input, fwd, trace.fwd, /*reversed=*/false,
                         upstream.leftCols(h_fwd), &grads->fwd);
  d_input += backprop_direction(input, bwd, trace.bwd, /*reversed=*/true,
                                upstream.rightCols(h_bwd), &grads->bwd);
  return d_input;
}

}  // namespace atex
