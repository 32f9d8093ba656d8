#ifndef TONECRAFT_NEURAL_TRAIN_HPP
#define TONECRAFT_NEURAL_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tonecraft/corpus/types.hpp"
#include "tonecraft/corpus/vocabulary.hpp"
#include "tonecraft/error.hpp"
#include "tonecraft/neural/adam.hpp"
#include "tonecraft/neural/model.hpp"
#include "tonecraft/neural/params.hpp"

namespace tonecraft::neural {

struct TrainOptions {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 0.001;
  double clip_norm = 5.0;  // <= 0 disables clipping
  std::uint64_t seed = 0;
  // Batches are drawn from pools of this many batches sorted by context length.
  std::size_t bucket_batches = 8;
};

struct TrainResult {
  Parameters params;
  std::vector<double> loss_history;  // token-weighted mean loss of each epoch
};

// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Throws InvalidPairError for the first pair that cannot be trained on.
inline void validate_pairs(std::span<const TrainingPair> pairs, std::size_t vocab_size) {
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (p.context.empty()) throw InvalidPairError(i, "empty context");
    if (p.response.empty() || p.response.back() != Vocabulary::kEos)
      throw InvalidPairError(i, "response must end with <eos>");
    auto bad = [&](int id) { return id < 0 || static_cast<std::size_t>(id) >= vocab_size || id == Vocabulary::kPad; };
    if (std::any_of(p.context.begin(), p.context.end(), bad) || std::any_of(p.response.begin(), p.response.end(), bad))
      throw InvalidPairError(i, "token index is <pad> or outside the vocabulary of " + std::to_string(vocab_size));
    if (std::find(p.response.begin(), p.response.end() - 1, Vocabulary::kEos) != p.response.end() - 1)
      throw InvalidPairError(i, "<eos> before the end of the response");
  }
}

/// Rescales `g` in place so its global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_global_norm(Gradients& g, double max_norm) {
  const double norm = std::sqrt(squared_norm(g));
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    Parameters::for_each(g, [&](const char*, Matrix& m) { m *= s; });
  }
  return norm;
}

/// Seeded epoch order: shuffle, cut into pools, sort each pool by context
/// length, cut into batches, shuffle the batch order.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::span<const TrainingPair> pairs,
                                                           const TrainOptions& opt, std::mt19937_64& rng) {
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t pool = opt.batch_size * std::max<std::size_t>(1, opt.bucket_batches);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < order.size(); start += pool) {
    const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
    const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + pool));
    std::stable_sort(first, last, [&](std::size_t a, std::size_t b) {
      return pairs[a].context.size() < pairs[b].context.size();
    });
    for (auto it = first; it < last; it += static_cast<std::ptrdiff_t>(std::min<std::size_t>(opt.batch_size, last - it)))
      batches.emplace_back(it, it + static_cast<std::ptrdiff_t>(std::min<std::size_t>(opt.batch_size, last - it)));
  }
  std::shuffle(batches.begin(), batches.end(), rng);
  return batches;
}

/// Trains from `initial` (typically init_params). Deterministic in its inputs.
inline TrainResult train(std::span<const TrainingPair> pairs, Parameters initial, const TrainOptions& opt,
                         const EpochCallback& on_epoch = {}) {
  if (pairs.empty()) throw InvalidArgument("no training pairs");
  if (opt.batch_size < 1) throw InvalidArgument("batch_size must be positive");
  validate_pairs(pairs, initial.vocab_size());
  TrainResult out{std::move(initial), {}};
  AdamState adam = make_adam(out.params, opt.learning_rate);
  std::mt19937_64 rng(opt.seed);
  std::vector<const TrainingPair*> members;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    double loss_sum = 0.0, tokens = 0.0;
    for (const auto& batch_ids : epoch_batches(pairs, opt, rng)) {
      members.clear();
      for (auto i : batch_ids) members.push_back(&pairs[i]);
      const ForwardCache cache = forward_batch(out.params, make_batch(members));
      loss_sum += cache.loss_sum;
      tokens += cache.token_count;
      Gradients g = backward(out.params, cache);
      clip_global_norm(g, opt.clip_norm);
      adam_step(out.params, g, adam);
    }
    const double mean = loss_sum / tokens;
    out.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return out;
}

/// Token-weighted mean loss over `pairs` without updating anything.
inline double evaluate_loss(const Parameters& p, std::span<const TrainingPair> pairs, std::size_t batch_size = 64) {
  if (pairs.empty()) throw InvalidArgument("no pairs to evaluate");
  double loss = 0.0, tokens = 0.0;
  std::vector<const TrainingPair*> members;
  for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
    members.clear();
    for (std::size_t i = start; i < std::min(pairs.size(), start + batch_size); ++i) members.push_back(&pairs[i]);
    const auto cache = forward_batch(p, make_batch(members));
    loss += cache.loss_sum;
    tokens += cache.token_count;
  }
  return loss / tokens;
}

}  // namespace tonecraft::neural

#endif  // TONECRAFT_NEURAL_TRAIN_HPP
