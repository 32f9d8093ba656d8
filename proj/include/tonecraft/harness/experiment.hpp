#ifndef TONECRAFT_HARNESS_EXPERIMENT_HPP
#define TONECRAFT_HARNESS_EXPERIMENT_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonecraft/corpus/pairs.hpp"
#include "tonecraft/corpus/threads.hpp"
#include "tonecraft/corpus/vocabulary.hpp"
#include "tonecraft/harness/synthetic.hpp"
#include "tonecraft/neural/model.hpp"
#include "tonecraft/neural/train.hpp"

namespace tonecraft::harness {

/// Fraction of greedy generations that contain `marker`. A marker outside the
/// vocabulary can never be emitted, so the rate is 0.
inline double tone_emission_rate(const neural::Parameters& params, const corpus::Vocabulary& vocab,
                                 std::span<const std::vector<int>> requests, Tone tone, const std::string& marker,
                                 std::size_t max_steps) {
  if (requests.empty()) throw InvalidArgument("tone_emission_rate needs at least one request");
  if (!vocab.contains(marker)) return 0.0;
  const int id = vocab.index_of(marker);
  std::size_t hits = 0;
  for (const auto& r : requests) {
    const auto g = neural::generate(params, r, tone, max_steps);
    hits += std::find(g.tokens.begin(), g.tokens.end(), id) != g.tokens.end() ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(requests.size());
}

struct ExperimentConfig {
  std::size_t conversations = 3000;
  std::size_t held_out = 200;
  std::size_t vocab_capacity = corpus::kDefaultVocabularyCapacity;
  std::size_t embedding_dim = 256;
  std::size_t hidden_dim = 512;
  std::size_t max_decode_steps = 40;
  neural::TrainOptions train;
  std::uint64_t init_seed = 0;
};

/// Small model that trains in about a minute on one core.
inline ExperimentConfig desk_config(std::uint64_t seed = 0) {
  ExperimentConfig c;
  c.vocab_capacity = 196;
  c.embedding_dim = 16;
  c.hidden_dim = 32;
  c.train.epochs = 30;
  c.train.seed = seed;
  c.init_seed = seed;
  return c;
}

struct EmissionRate {
  Tone tone;
  std::string marker;
  double rate;
};

struct ExperimentReport {
  SyntheticSpec spec;
  ExperimentConfig config;
  neural::ModelConfig model;
  std::size_t training_pairs = 0;
  std::size_t held_out_requests = 0;
  std::vector<double> loss_history;
  std::vector<EmissionRate> emission_rates;  // every (requested tone, marker) combination

  double rate(Tone tone, const std::string& marker) const {
    for (const auto& r : emission_rates)
      if (r.tone == tone && r.marker == marker) return r.rate;
    throw InvalidArgument("no emission rate for that tone and marker");
  }
};

struct ExperimentRun {
  ExperimentReport report;
  corpus::Vocabulary vocabulary;
  neural::Parameters params;
};

/// Contexts of the first round of each conversation, encoded with `vocab`.
inline std::vector<std::vector<int>> request_contexts(std::span<const Conversation> convs,
                                                      const corpus::Vocabulary& vocab) {
  std::vector<std::vector<int>> out;
  for (const auto& c : convs) out.push_back(vocab.encode(corpus::tokenize(c.utterances.front().text)));
  return out;
}

/// synth -> vocabulary -> pairs (markers as keywords) -> train -> emission
/// rates on held-out requests. Held-out conversations come from a separate
/// stream and their message ids continue after the training archive.
inline ExperimentRun run_experiment(const SyntheticSpec& spec, const ExperimentConfig& config,
                                    const neural::EpochCallback& on_epoch = {}) {
  validate(spec);
  if (config.held_out < 1) throw InvalidArgument("held_out must be at least 1");
  const auto train_convs = synth_corpus(spec, config.conversations, 0);
  const auto held_convs = synth_corpus(spec, config.held_out, 1);

  // Route the training corpus through the archive reader so the run exercises
  // the same path as real data.
  const auto archive = to_raw_messages(train_convs);
  const auto convs = corpus::filter_conversations(corpus::reconstruct_threads(archive));
  const auto held_archive = to_raw_messages(held_convs, archive.size() + 1);
  const auto held = corpus::filter_conversations(corpus::reconstruct_threads(held_archive));

  std::vector<std::vector<std::string>> counted;
  for (const auto& c : convs) counted.push_back(corpus::conversation_tokens(c));
  ExperimentRun run;
  run.vocabulary = corpus::build_vocabulary(counted, config.vocab_capacity);
  const auto keywords = marker_keywords(spec);
  std::vector<corpus::TrainingPair> pairs;
  for (const auto& c : convs)
    for (auto& p : corpus::make_pairs(c, run.vocabulary, keywords)) pairs.push_back(std::move(p));

  auto& report = run.report;
  report.spec = spec;
  report.config = config;
  report.model = {run.vocabulary.size(), config.embedding_dim, config.hidden_dim, config.max_decode_steps};
  report.training_pairs = pairs.size();
  auto trained = neural::train(pairs, neural::init_params(report.model, config.init_seed), config.train, on_epoch);
  run.params = std::move(trained.params);
  report.loss_history = std::move(trained.loss_history);

  const auto requests = request_contexts(held, run.vocabulary);
  report.held_out_requests = requests.size();
  for (Tone t : corpus::kAllTones)
    for (Tone m : {Tone::empathetic, Tone::passionate})
      report.emission_rates.push_back({t, spec.markers.at(m),
                                       tone_emission_rate(run.params, run.vocabulary, requests, t, spec.markers.at(m),
                                                          config.max_decode_steps)});
  return run;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"conversations", c.conversations},
          {"held_out", c.held_out},
          {"vocab_capacity", c.vocab_capacity},
          {"embedding_dim", c.embedding_dim},
          {"hidden_dim", c.hidden_dim},
          {"max_decode_steps", c.max_decode_steps},
          {"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"learning_rate", c.train.learning_rate},
          {"clip_norm", c.train.clip_norm},
          {"train_seed", c.train.seed},
          {"init_seed", c.init_seed}};
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& e : r.emission_rates)
    rates.push_back({{"tone", corpus::tone_name(e.tone)}, {"marker", e.marker}, {"rate", e.rate}});
  return {{"spec", to_json(r.spec)},
          {"config", to_json(r.config)},
          {"model", {{"vocab_size", r.model.vocab_size},
                     {"embedding_dim", r.model.embedding_dim},
                     {"hidden_dim", r.model.hidden_dim},
                     {"max_decode_steps", r.model.max_decode_steps}}},
          {"training_pairs", r.training_pairs},
          {"held_out_requests", r.held_out_requests},
          {"loss_history", r.loss_history},
          {"emission_rates", rates}};
}

}  // namespace tonecraft::harness

#endif  // TONECRAFT_HARNESS_EXPERIMENT_HPP
