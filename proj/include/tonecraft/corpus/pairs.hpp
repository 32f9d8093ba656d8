#ifndef TONECRAFT_CORPUS_PAIRS_HPP
#define TONECRAFT_CORPUS_PAIRS_HPP

#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "tonecraft/corpus/text.hpp"
#include "tonecraft/corpus/types.hpp"
#include "tonecraft/corpus/vocabulary.hpp"

namespace tonecraft::corpus {

// Keywords may be n-grams written with single spaces ("sorry to hear").
struct ToneKeywords {
  std::set<std::string> empathetic;
  std::set<std::string> passionate;
};

namespace detail {

inline std::vector<std::string> split_words(const std::string& phrase) {
  std::istringstream is(phrase);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline bool contains_ngram(std::span<const std::string> tokens, std::span<const std::string> gram) {
  if (gram.empty() || gram.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + gram.size() <= tokens.size(); ++i)
    if (std::equal(gram.begin(), gram.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

inline bool contains_any(std::span<const std::string> tokens, const std::set<std::string>& keywords) {
  for (const auto& k : keywords)
    if (contains_ngram(tokens, split_words(k))) return true;
  return false;
}

}  // namespace detail

/// Empathetic keywords win over passionate ones; no keyword means neutral.
inline Tone assign_tone(std::span<const std::string> response_tokens, const std::set<std::string>& empathetic,
                        const std::set<std::string>& passionate) {
  if (detail::contains_any(response_tokens, empathetic)) return Tone::empathetic;
  if (detail::contains_any(response_tokens, passionate)) return Tone::passionate;
  return Tone::neutral;
}

inline Tone assign_tone(std::span<const std::string> response_tokens, const ToneKeywords& keywords) {
  return assign_tone(response_tokens, keywords.empathetic, keywords.passionate);
}

/// Tokens of turns joined by the turn separator.
inline std::vector<std::string> join_turns(std::span<const std::vector<std::string>> turns) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i > 0) out.emplace_back(kTurnSeparator);
    out.insert(out.end(), turns[i].begin(), turns[i].end());
  }
  return out;
}

/// Token stream of a whole conversation, used for vocabulary counting so the
/// turn separator is ranked like any other token.
inline std::vector<std::string> conversation_tokens(const Conversation& conv) {
  std::vector<std::vector<std::string>> turns;
  for (const auto& u : conv.utterances) turns.push_back(tokenize(u.text));
  return join_turns(turns);
}

/// One pair per round i: context c1 <sep> a1 <sep> ... <sep> c_i, response
/// a_i + <eos>, tone from the response keywords. A round whose context has no
/// tokens at all (only possible for an empty first request) is skipped.
inline std::vector<TrainingPair> make_pairs(const Conversation& conv, const Vocabulary& vocab,
                                            const ToneKeywords& keywords) {
  std::vector<TrainingPair> pairs;
  std::vector<std::vector<std::string>> turns;
  for (std::size_t i = 0; i + 1 < conv.utterances.size(); i += 2) {
    turns.push_back(tokenize(conv.utterances[i].text));
    const auto context = join_turns(turns);
    auto response_tokens = tokenize(conv.utterances[i + 1].text);
    if (!context.empty()) {
      TrainingPair pair;
      pair.context = vocab.encode(context);
      pair.response = vocab.encode(response_tokens);
      pair.response.push_back(Vocabulary::kEos);
      pair.tone = assign_tone(response_tokens, keywords);
      pairs.push_back(std::move(pair));
    }
    turns.push_back(std::move(response_tokens));
  }
  return pairs;
}

}  // namespace tonecraft::corpus

#endif  // TONECRAFT_CORPUS_PAIRS_HPP
