#ifndef TONECRAFT_NEURAL_PARAMS_HPP
#define TONECRAFT_NEURAL_PARAMS_HPP

#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "tonecraft/error.hpp"

namespace tonecraft::neural {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ModelConfig {
  std::size_t vocab_size = 10000;
  std::size_t embedding_dim = 256;
  std::size_t hidden_dim = 512;
  std::size_t max_decode_steps = 40;

  void validate() const {
    if (vocab_size < 5) throw InvalidArgument("vocab_size must be at least 5");
    if (embedding_dim < 1 || hidden_dim < 1) throw InvalidArgument("embedding and hidden dims must be positive");
    if (max_decode_steps < 1) throw InvalidArgument("max_decode_steps must be positive");
  }

  bool operator==(const ModelConfig&) const = default;
};

// Gate rows are stacked [input; forget; cell; output], each hidden_dim tall.
struct LstmParams {
  Matrix w_x;  // 4h x input_dim
  Matrix w_h;  // 4h x h
  Matrix b;    // 4h x 1
};

/// Learnable arrays of the tone-aware encoder-decoder. Gradients use the same
/// type.
struct Parameters {
  Matrix embedding;  // V x d_e
  LstmParams encoder;
  LstmParams decoder;  // input is embedding ⊕ tone, d_e + 1 wide
  Matrix bridge;       // d_e x d_h, maps the encoder state to the first decoder input
  Matrix output_w;     // V x d_h
  Matrix output_b;     // V x 1

  std::size_t vocab_size() const { return static_cast<std::size_t>(embedding.rows()); }
  std::size_t embedding_dim() const { return static_cast<std::size_t>(embedding.cols()); }
  std::size_t hidden_dim() const { return static_cast<std::size_t>(encoder.w_h.cols()); }

  bool operator==(const Parameters& o) const {
    bool same = true;
    for_each(*this, o, [&](const char*, const Matrix& a, const Matrix& b) {
      same = same && a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    });
    return same;
  }

  /// Visits every array with its checkpoint name, in checkpoint order.
  template <class P, class F>
  static void for_each(P& p, F&& f) {
    f("embedding", p.embedding);
    f("encoder.w_x", p.encoder.w_x);
    f("encoder.w_h", p.encoder.w_h);
    f("encoder.b", p.encoder.b);
    f("decoder.w_x", p.decoder.w_x);
    f("decoder.w_h", p.decoder.w_h);
    f("decoder.b", p.decoder.b);
    f("bridge", p.bridge);
    f("output.w", p.output_w);
    f("output.b", p.output_b);
  }

  /// Visits matching arrays of two parameter sets.
  template <class P, class Q, class F>
  static void for_each(P& p, Q& q, F&& f) {
    f("embedding", p.embedding, q.embedding);
    f("encoder.w_x", p.encoder.w_x, q.encoder.w_x);
    f("encoder.w_h", p.encoder.w_h, q.encoder.w_h);
    f("encoder.b", p.encoder.b, q.encoder.b);
    f("decoder.w_x", p.decoder.w_x, q.decoder.w_x);
    f("decoder.w_h", p.decoder.w_h, q.decoder.w_h);
    f("decoder.b", p.decoder.b, q.decoder.b);
    f("bridge", p.bridge, q.bridge);
    f("output.w", p.output_w, q.output_w);
    f("output.b", p.output_b, q.output_b);
  }
};

using Gradients = Parameters;

/// All-zero arrays shaped for `config`.
inline Parameters zero_params(const ModelConfig& config) {
  config.validate();
  const auto V = static_cast<Eigen::Index>(config.vocab_size);
  const auto E = static_cast<Eigen::Index>(config.embedding_dim);
  const auto H = static_cast<Eigen::Index>(config.hidden_dim);
  Parameters p;
  p.embedding = Matrix::Zero(V, E);
  p.encoder = {Matrix::Zero(4 * H, E), Matrix::Zero(4 * H, H), Matrix::Zero(4 * H, 1)};
  p.decoder = {Matrix::Zero(4 * H, E + 1), Matrix::Zero(4 * H, H), Matrix::Zero(4 * H, 1)};
  p.bridge = Matrix::Zero(E, H);
  p.output_w = Matrix::Zero(V, H);
  p.output_b = Matrix::Zero(V, 1);
  return p;
}

inline Parameters zeros_like(const Parameters& p) {
  Parameters z = p;
  Parameters::for_each(z, [](const char*, Matrix& m) { m.setZero(); });
  return z;
}

/// Every weight and bias iid uniform on [-scale, scale]; deterministic in (config, seed).
inline Parameters init_params(const ModelConfig& config, std::uint64_t seed, double scale = 0.1) {
  Parameters p = zero_params(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-scale, scale);
  Parameters::for_each(p, [&](const char*, Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng);
  });
  return p;
}

inline bool same_shapes(const Parameters& a, const Parameters& b) {
  bool same = true;
  Parameters::for_each(a, b, [&](const char*, const Matrix& x, const Matrix& y) {
    same = same && x.rows() == y.rows() && x.cols() == y.cols();
  });
  return same;
}

inline double squared_norm(const Parameters& p) {
  double s = 0.0;
  Parameters::for_each(p, [&](const char*, const Matrix& m) { s += m.squaredNorm(); });
  return s;
}

inline bool all_finite(const Parameters& p) {
  bool ok = true;
  Parameters::for_each(p, [&](const char*, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

}  // namespace tonecraft::neural

#endif  // TONECRAFT_NEURAL_PARAMS_HPP
