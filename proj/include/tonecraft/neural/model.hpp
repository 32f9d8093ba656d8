#ifndef TONECRAFT_NEURAL_MODEL_HPP
#define TONECRAFT_NEURAL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tonecraft/corpus/types.hpp"
#include "tonecraft/corpus/vocabulary.hpp"
#include "tonecraft/error.hpp"
#include "tonecraft/neural/lstm.hpp"
#include "tonecraft/neural/params.hpp"

namespace tonecraft::neural {

using corpus::Tone;
using corpus::TrainingPair;
using corpus::Vocabulary;

/// Max-subtracted softmax; finite for any finite input.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd e = (logits.array() - logits.maxCoeff()).exp();
  return (e / e.sum()).matrix();
}

inline Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index b = 0; b < logits.cols(); ++b) out.col(b) = softmax(logits.col(b));
  return out;
}

/// Padded mini-batch. Token matrices are steps x batch, padded with <pad>.
struct Batch {
  Eigen::MatrixXi context;
  Eigen::MatrixXi response;
  std::vector<std::size_t> context_lengths;
  std::vector<std::size_t> response_lengths;
  Eigen::RowVectorXd tones;

  std::size_t size() const { return context_lengths.size(); }
};

inline Batch make_batch(std::span<const TrainingPair* const> pairs) {
  Batch b;
  const auto B = static_cast<Eigen::Index>(pairs.size());
  std::size_t n = 0, m = 0;
  for (const auto* p : pairs) {
    n = std::max(n, p->context.size());
    m = std::max(m, p->response.size());
  }
  b.context = Eigen::MatrixXi::Constant(static_cast<Eigen::Index>(n), B, Vocabulary::kPad);
  b.response = Eigen::MatrixXi::Constant(static_cast<Eigen::Index>(m), B, Vocabulary::kPad);
  b.tones.resize(B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const auto& p = *pairs[static_cast<std::size_t>(j)];
    for (std::size_t s = 0; s < p.context.size(); ++s) b.context(static_cast<Eigen::Index>(s), j) = p.context[s];
    for (std::size_t s = 0; s < p.response.size(); ++s) b.response(static_cast<Eigen::Index>(s), j) = p.response[s];
    b.context_lengths.push_back(p.context.size());
    b.response_lengths.push_back(p.response.size());
    b.tones(j) = corpus::tone_value(p.tone);
  }
  return b;
}

inline Batch make_batch(const TrainingPair& pair) {
  const TrainingPair* one[] = {&pair};
  return make_batch(one);
}

/// Activations of one forward pass, enough for exact backpropagation.
struct ForwardCache {
  Batch batch;
  std::size_t vocab_size = 0, embedding_dim = 0, hidden_dim = 0;
  std::vector<LstmStepCache> encoder;
  std::vector<Eigen::RowVectorXd> encoder_mask;  // 1 where the step consumed a real token
  Eigen::MatrixXd encoded;                       // final encoder hidden state, d_h x B
  Eigen::MatrixXd bridged;                       // bridge * encoded, d_e x B
  std::vector<LstmStepCache> decoder;            // decoder[s].x is the (d_e + 1) x B input
  std::vector<Eigen::MatrixXd> probabilities;    // V x B per decoder step
  std::vector<Eigen::RowVectorXd> loss_mask;     // 1 where step s predicts a real response token
  double loss_sum = 0.0;
  double token_count = 0.0;

  double mean_loss() const { return token_count > 0.0 ? loss_sum / token_count : 0.0; }
};

namespace detail {

inline void check_ids(const Eigen::MatrixXi& ids, std::size_t vocab_size, const char* what) {
  if (ids.size() > 0 && (ids.minCoeff() < 0 || static_cast<std::size_t>(ids.maxCoeff()) >= vocab_size))
    throw InvalidArgument(std::string(what) + " token index out of range for vocabulary of " +
                          std::to_string(vocab_size));
}

inline Eigen::MatrixXd gather_embeddings(const Matrix& embedding, const Eigen::MatrixXi& ids, Eigen::Index step) {
  Eigen::MatrixXd x(embedding.cols(), ids.cols());
  for (Eigen::Index b = 0; b < ids.cols(); ++b) x.col(b) = embedding.row(ids(step, b)).transpose();
  return x;
}

}  // namespace detail

/// Teacher-forced forward pass over a padded batch.
///
/// The encoder runs from a zero state; padded steps carry the state through.
/// The decoder starts from a zero state and reads (bridge * h) ⊕ t, then
/// v(y_1) ⊕ t, ..., v(y_{m-1}) ⊕ t. Step s predicts y_s. The loss is the mean
/// cross-entropy over real (non-pad) response positions of the whole batch.
inline ForwardCache forward_batch(const Parameters& p, const Batch& batch) {
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto V = p.vocab_size();
  const auto E = static_cast<Eigen::Index>(p.embedding_dim());
  const auto H = static_cast<Eigen::Index>(p.hidden_dim());
  if (B == 0) throw InvalidArgument("empty batch");
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch.context_lengths[b] == 0) throw InvalidArgument("empty context sequence");
    if (batch.response_lengths[b] == 0) throw InvalidArgument("empty response sequence");
  }
  detail::check_ids(batch.context, V, "context");
  detail::check_ids(batch.response, V, "response");

  ForwardCache cache;
  cache.batch = batch;
  cache.vocab_size = V;
  cache.embedding_dim = static_cast<std::size_t>(E);
  cache.hidden_dim = static_cast<std::size_t>(H);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, B), c = Eigen::MatrixXd::Zero(H, B);
  for (Eigen::Index s = 0; s < batch.context.rows(); ++s) {
    auto step = lstm_forward(p.encoder, detail::gather_embeddings(p.embedding, batch.context, s), h, c);
    Eigen::RowVectorXd mask(B);
    for (Eigen::Index b = 0; b < B; ++b) {
      mask(b) = static_cast<std::size_t>(s) < batch.context_lengths[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
      if (mask(b) == 1.0) {
        h.col(b) = step.h.col(b);
        c.col(b) = step.c.matrix().col(b);
      }
    }
    if (!h.allFinite()) throw NumericError("non-finite encoder state", static_cast<std::size_t>(s));
    cache.encoder.push_back(std::move(step));
    cache.encoder_mask.push_back(std::move(mask));
  }
  cache.encoded = h;
  cache.bridged = p.bridge * h;

  h.setZero();
  c.setZero();
  for (Eigen::Index s = 0; s < batch.response.rows(); ++s) {
    Eigen::MatrixXd x(E + 1, B);
    x.topRows(E) = s == 0 ? cache.bridged : detail::gather_embeddings(p.embedding, batch.response, s - 1);
    x.row(E) = batch.tones;
    auto step = lstm_forward(p.decoder, std::move(x), h, c);
    h = step.h;
    c = step.c.matrix();
    Eigen::MatrixXd logits = p.output_w * h;
    logits.colwise() += p.output_b.col(0);
    Eigen::MatrixXd probs = softmax_columns(logits);
    Eigen::RowVectorXd mask(B);
    double step_loss = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
      mask(b) = static_cast<std::size_t>(s) < batch.response_lengths[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
      if (mask(b) == 0.0) continue;
      // log-softmax directly from logits keeps tiny probabilities finite
      const double lse = logits.col(b).maxCoeff() +
                         std::log((logits.col(b).array() - logits.col(b).maxCoeff()).exp().sum());
      step_loss += lse - logits(batch.response(s, b), b);
      cache.token_count += 1.0;
    }
    if (!std::isfinite(step_loss) || !h.allFinite())
      throw NumericError("non-finite decoder activation", static_cast<std::size_t>(s));
    cache.loss_sum += step_loss;
    cache.decoder.push_back(std::move(step));
    cache.probabilities.push_back(std::move(probs));
    cache.loss_mask.push_back(std::move(mask));
  }
  return cache;
}

/// Mean token cross-entropy of one pair, with the cache for backward().
inline std::pair<double, ForwardCache> forward_loss(const Parameters& p, const TrainingPair& pair) {
  if (pair.context.empty()) throw InvalidArgument("empty context sequence");
  if (pair.response.empty()) throw InvalidArgument("empty response sequence");
  ForwardCache cache = forward_batch(p, make_batch(pair));
  const double loss = cache.mean_loss();
  return {loss, std::move(cache)};
}

/// Exact gradient of the cached mean loss with respect to every parameter.
inline Gradients backward(const Parameters& p, const ForwardCache& cache) {
  if (cache.vocab_size != p.vocab_size() || cache.embedding_dim != p.embedding_dim() ||
      cache.hidden_dim != p.hidden_dim() || cache.decoder.size() != static_cast<std::size_t>(cache.batch.response.rows()))
    throw InvalidArgument("stale forward cache: shapes do not match the parameters");
  Gradients g = zeros_like(p);
  const auto& batch = cache.batch;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const auto E = static_cast<Eigen::Index>(p.embedding_dim());
  const auto H = static_cast<Eigen::Index>(p.hidden_dim());
  const double scale = cache.token_count > 0.0 ? 1.0 / cache.token_count : 0.0;

  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(H, B), dc = Eigen::MatrixXd::Zero(H, B);
  Eigen::MatrixXd d_bridged;
  for (auto s = static_cast<Eigen::Index>(cache.decoder.size()) - 1; s >= 0; --s) {
    const auto& step = cache.decoder[static_cast<std::size_t>(s)];
    Eigen::MatrixXd dlogits = cache.probabilities[static_cast<std::size_t>(s)];
    const auto& mask = cache.loss_mask[static_cast<std::size_t>(s)];
    for (Eigen::Index b = 0; b < B; ++b) {
      if (mask(b) == 0.0) {
        dlogits.col(b).setZero();
        continue;
      }
      dlogits(batch.response(s, b), b) -= 1.0;
      dlogits.col(b) *= scale;
    }
    g.output_w.noalias() += dlogits * step.h.transpose();
    g.output_b.col(0) += dlogits.rowwise().sum();
    dh.noalias() += p.output_w.transpose() * dlogits;
    auto back = lstm_backward(p.decoder, step, dh, dc, g.decoder);
    if (s == 0) {
      d_bridged = back.dx.topRows(E);
    } else {
      for (Eigen::Index b = 0; b < B; ++b)
        g.embedding.row(batch.response(s - 1, b)) += back.dx.col(b).head(E).transpose();
    }
    dh = std::move(back.dh_prev);
    dc = std::move(back.dc_prev);
  }

  g.bridge.noalias() += d_bridged * cache.encoded.transpose();
  dh = p.bridge.transpose() * d_bridged;
  dc.setZero();
  for (auto s = static_cast<Eigen::Index>(cache.encoder.size()) - 1; s >= 0; --s) {
    const auto& step = cache.encoder[static_cast<std::size_t>(s)];
    const auto& mask = cache.encoder_mask[static_cast<std::size_t>(s)];
    const Eigen::MatrixXd dh_new = dh * mask.asDiagonal();
    const Eigen::MatrixXd dc_new = dc * mask.asDiagonal();
    auto back = lstm_backward(p.encoder, step, dh_new, dc_new, g.encoder);
    const Eigen::RowVectorXd keep = (1.0 - mask.array()).matrix();
    dh = back.dh_prev + dh * keep.asDiagonal();
    dc = back.dc_prev + dc * keep.asDiagonal();
    for (Eigen::Index b = 0; b < B; ++b)
      if (mask(b) == 1.0) g.embedding.row(batch.context(s, b)) += back.dx.col(b).transpose();
  }
  return g;
}

/// Final encoder hidden state of a nonempty token sequence.
inline Eigen::VectorXd encode(const Parameters& p, std::span<const int> tokens) {
  if (tokens.empty()) throw InvalidArgument("cannot encode an empty sequence");
  LstmState state = zero_state(static_cast<Eigen::Index>(p.hidden_dim()));
  for (int id : tokens) {
    if (id < 0 || static_cast<std::size_t>(id) >= p.vocab_size())
      throw InvalidArgument("token index " + std::to_string(id) + " out of range");
    state = lstm_step(p.encoder, p.embedding.row(id).transpose(), state);
  }
  return state.h;
}

inline Eigen::VectorXd decoder_input(const Eigen::VectorXd& vec, Tone tone) {
  Eigen::VectorXd x(vec.size() + 1);
  x.head(vec.size()) = vec;
  x(vec.size()) = corpus::tone_value(tone);
  return x;
}

/// Logits of the first decoder step for an encoded context.
inline Eigen::VectorXd first_step_logits(const Parameters& p, const Eigen::VectorXd& encoded, Tone tone) {
  const auto state = lstm_step(p.decoder, decoder_input(p.bridge * encoded, tone),
                               zero_state(static_cast<Eigen::Index>(p.hidden_dim())));
  return p.output_w * state.h + p.output_b.col(0);
}

enum class StopReason { end_token, max_steps };

inline std::string_view to_string(StopReason r) { return r == StopReason::end_token ? "end_token" : "max_steps"; }

struct GeneratedSequence {
  std::vector<int> tokens;
  StopReason stop_reason = StopReason::max_steps;

  bool operator==(const GeneratedSequence&) const = default;
};

/// Greedy decoding from an encoded context. <pad> and <sos> are never
/// emitted; ties go to the lowest index; <eos> ends decoding and is dropped.
inline GeneratedSequence decode_greedy(const Parameters& p, const Eigen::VectorXd& encoded, Tone tone,
                                       std::size_t max_steps) {
  GeneratedSequence out;
  LstmState state = zero_state(static_cast<Eigen::Index>(p.hidden_dim()));
  Eigen::VectorXd x = decoder_input(p.bridge * encoded, tone);
  for (std::size_t step = 0; step < max_steps; ++step) {
    state = lstm_step(p.decoder, x, state);
    const Eigen::VectorXd logits = p.output_w * state.h + p.output_b.col(0);
    int best = -1;
    for (Eigen::Index v = 0; v < logits.size(); ++v) {
      if (v == Vocabulary::kPad || v == Vocabulary::kSos) continue;
      if (best < 0 || logits(v) > logits(best)) best = static_cast<int>(v);
    }
    if (best == Vocabulary::kEos) {
      out.stop_reason = StopReason::end_token;
      return out;
    }
    out.tokens.push_back(best);
    x = decoder_input(p.embedding.row(best).transpose(), tone);
  }
  out.stop_reason = StopReason::max_steps;
  return out;
}

inline GeneratedSequence generate(const Parameters& p, std::span<const int> context, Tone tone,
                                  std::size_t max_steps) {
  return decode_greedy(p, encode(p, context), tone, max_steps);
}

}  // namespace tonecraft::neural

#endif  // TONECRAFT_NEURAL_MODEL_HPP
