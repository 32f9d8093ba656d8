#ifndef TONECRAFT_NEURAL_ADAM_HPP
#define TONECRAFT_NEURAL_ADAM_HPP

#include <cmath>
#include <cstdint>

#include "tonecraft/error.hpp"
#include "tonecraft/neural/params.hpp"

namespace tonecraft::neural {

struct AdamState {
  Parameters m;  // first moments
  Parameters v;  // second moments
  std::uint64_t step = 0;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

inline AdamState make_adam(const Parameters& like, double learning_rate = 0.001) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning rate must be positive");
  AdamState s;
  s.m = zeros_like(like);
  s.v = zeros_like(like);
  s.learning_rate = learning_rate;
  return s;
}

/// Bias-corrected Adam update. Nothing is modified when the gradient is
/// rejected.
inline void adam_step(Parameters& params, const Gradients& grads, AdamState& state) {
  if (!same_shapes(params, grads) || !same_shapes(params, state.m) || !same_shapes(params, state.v))
    throw InvalidArgument("adam_step: shape mismatch between parameters, gradients and state");
  if (!all_finite(grads)) throw NumericError("non-finite gradient", static_cast<std::size_t>(state.step));
  ++state.step;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.learning_rate, eps = state.epsilon;
  auto update = [&](Matrix& p, const Matrix& g, Matrix& m, Matrix& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  update(params.embedding, grads.embedding, state.m.embedding, state.v.embedding);
  update(params.encoder.w_x, grads.encoder.w_x, state.m.encoder.w_x, state.v.encoder.w_x);
  update(params.encoder.w_h, grads.encoder.w_h, state.m.encoder.w_h, state.v.encoder.w_h);
  update(params.encoder.b, grads.encoder.b, state.m.encoder.b, state.v.encoder.b);
  update(params.decoder.w_x, grads.decoder.w_x, state.m.decoder.w_x, state.v.decoder.w_x);
  update(params.decoder.w_h, grads.decoder.w_h, state.m.decoder.w_h, state.v.decoder.w_h);
  update(params.decoder.b, grads.decoder.b, state.m.decoder.b, state.v.decoder.b);
  update(params.bridge, grads.bridge, state.m.bridge, state.v.bridge);
  update(params.output_w, grads.output_w, state.m.output_w, state.v.output_w);
  update(params.output_b, grads.output_b, state.m.output_b, state.v.output_b);
}

}  // namespace tonecraft::neural

#endif  // TONECRAFT_NEURAL_ADAM_HPP
