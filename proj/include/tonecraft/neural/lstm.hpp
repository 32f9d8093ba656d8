#ifndef TONECRAFT_NEURAL_LSTM_HPP
#define TONECRAFT_NEURAL_LSTM_HPP

#include <utility>

#include <Eigen/Dense>

#include "tonecraft/neural/params.hpp"

namespace tonecraft::neural {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

struct LstmState {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

/// One step of a standard LSTM cell on a single input vector:
/// i, f, o = sigmoid, g = tanh, c' = f*c + i*g, h' = o*tanh(c').
inline LstmState lstm_step(const LstmParams& w, const Eigen::VectorXd& x, const LstmState& state) {
  const Eigen::Index H = w.w_h.cols();
  const Eigen::VectorXd a = w.w_x * x + w.w_h * state.h + w.b.col(0);
  const Eigen::ArrayXd i = sigmoid(a.segment(0, H).array());
  const Eigen::ArrayXd f = sigmoid(a.segment(H, H).array());
  const Eigen::ArrayXd g = a.segment(2 * H, H).array().tanh();
  const Eigen::ArrayXd o = sigmoid(a.segment(3 * H, H).array());
  LstmState next;
  next.c = (f * state.c.array() + i * g).matrix();
  next.h = (o * next.c.array().tanh()).matrix();
  return next;
}

inline LstmState zero_state(Eigen::Index hidden) { return {Eigen::VectorXd::Zero(hidden), Eigen::VectorXd::Zero(hidden)}; }

// Activations of one batched step (columns are batch entries), kept for BPTT.
struct LstmStepCache {
  Eigen::MatrixXd x;
  Eigen::MatrixXd h_prev, c_prev;
  Eigen::ArrayXXd i, f, g, o;
  Eigen::ArrayXXd c, tanh_c;
  Eigen::MatrixXd h;
};

inline LstmStepCache lstm_forward(const LstmParams& w, Eigen::MatrixXd x, const Eigen::MatrixXd& h_prev,
                                  const Eigen::MatrixXd& c_prev) {
  const Eigen::Index H = w.w_h.cols();
  Eigen::MatrixXd a = w.w_x * x + w.w_h * h_prev;
  a.colwise() += w.b.col(0);
  LstmStepCache s;
  s.x = std::move(x);
  s.h_prev = h_prev;
  s.c_prev = c_prev;
  s.i = sigmoid(a.middleRows(0, H).array());
  s.f = sigmoid(a.middleRows(H, H).array());
  s.g = a.middleRows(2 * H, H).array().tanh();
  s.o = sigmoid(a.middleRows(3 * H, H).array());
  s.c = s.f * c_prev.array() + s.i * s.g;
  s.tanh_c = s.c.tanh();
  s.h = (s.o * s.tanh_c).matrix();
  return s;
}

struct LstmBackward {
  Eigen::MatrixXd dx, dh_prev, dc_prev;
};

/// Backpropagates dL/dh' and dL/dc' through one cached step, accumulating
/// weight gradients into `grad`.
inline LstmBackward lstm_backward(const LstmParams& w, const LstmStepCache& s, const Eigen::MatrixXd& dh,
                                  const Eigen::MatrixXd& dc, LstmParams& grad) {
  const Eigen::Index H = w.w_h.cols();
  const Eigen::ArrayXXd dc_total = dc.array() + dh.array() * s.o * (1.0 - s.tanh_c.square());
  Eigen::MatrixXd da(4 * H, dh.cols());
  da.middleRows(0, H) = (dc_total * s.g * s.i * (1.0 - s.i)).matrix();
  da.middleRows(H, H) = (dc_total * s.c_prev.array() * s.f * (1.0 - s.f)).matrix();
  da.middleRows(2 * H, H) = (dc_total * s.i * (1.0 - s.g.square())).matrix();
  da.middleRows(3 * H, H) = (dh.array() * s.tanh_c * s.o * (1.0 - s.o)).matrix();
  grad.w_x.noalias() += da * s.x.transpose();
  grad.w_h.noalias() += da * s.h_prev.transpose();
  grad.b.col(0) += da.rowwise().sum();
  LstmBackward out;
  out.dx = w.w_x.transpose() * da;
  out.dh_prev = w.w_h.transpose() * da;
  out.dc_prev = (dc_total * s.f).matrix();
  return out;
}

}  // namespace tonecraft::neural

#endif  // TONECRAFT_NEURAL_LSTM_HPP
