#ifndef TONECRAFT_ANALYTICS_TONE_DELTA_HPP
#define TONECRAFT_ANALYTICS_TONE_DELTA_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tonecraft/corpus/types.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::analytics {

struct RatedUtterance {
  corpus::Role role = corpus::Role::user;
  std::vector<double> tones;  // mean rating per tone
};

struct ToneDeltaSample {
  double delta = 0.0;               // T^j(c_{i+1}) - T^j(c_i)
  std::vector<double> agent_tones;  // ratings of a_i
};

/// Samples for every adjoining pair of user requests (c_i, c_{i+1}), paired
/// with the tones of the agent response a_i in between. Result is indexed by
/// tone j.
inline std::vector<std::vector<ToneDeltaSample>> tone_delta_samples(std::span<const RatedUtterance> conversation) {
  if (conversation.empty()) return {};
  const std::size_t tones = conversation.front().tones.size();
  for (std::size_t i = 0; i < conversation.size(); ++i) {
    const auto expected = i % 2 == 0 ? corpus::Role::user : corpus::Role::agent;
    if (conversation[i].role != expected)
      throw InvalidArgument("tone_delta_samples: utterance " + std::to_string(i) + " breaks user/agent alternation");
    if (conversation[i].tones.size() != tones)
      throw InvalidArgument("tone_delta_samples: utterance " + std::to_string(i) + " has a different tone count");
  }
  std::vector<std::vector<ToneDeltaSample>> out(tones);
  for (std::size_t i = 0; i + 2 < conversation.size(); i += 2) {
    const auto& request = conversation[i].tones;
    const auto& next = conversation[i + 2].tones;
    for (std::size_t j = 0; j < tones; ++j) out[j].push_back({next[j] - request[j], conversation[i + 1].tones});
  }
  return out;
}

/// Stacks samples of one tone into (y, X) for fit_ols.
inline std::pair<Eigen::VectorXd, Eigen::MatrixXd> regression_data(std::span<const ToneDeltaSample> samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto k = n == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(samples.front().agent_tones.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    y(i) = s.delta;
    for (Eigen::Index j = 0; j < k; ++j) X(i, j) = s.agent_tones[static_cast<std::size_t>(j)];
  }
  return {std::move(y), std::move(X)};
}

}  // namespace tonecraft::analytics

#endif  // TONECRAFT_ANALYTICS_TONE_DELTA_HPP
