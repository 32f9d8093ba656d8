#ifndef TONECRAFT_CORPUS_VOCABULARY_HPP
#define TONECRAFT_CORPUS_VOCABULARY_HPP

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tonecraft/error.hpp"

namespace tonecraft::corpus {

inline constexpr std::size_t kDefaultVocabularyCapacity = 10000;

// Joins turns inside a multi-round context. Cannot be produced by tokenize.
inline constexpr std::string_view kTurnSeparator = "<sep>";

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSos = 2;
  static constexpr int kEos = 3;
  static constexpr int kNumSpecials = 4;

  Vocabulary() : tokens_{"<pad>", "<unk>", "<sos>", "<eos>"} {
    for (int i = 0; i < kNumSpecials; ++i) index_.emplace(tokens_[i], i);
  }

  // Regular tokens in index order (index = position + 4).
  static Vocabulary from_tokens(std::span<const std::string> regular) {
    Vocabulary v;
    for (const auto& t : regular) {
      if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos)
        throw InvalidArgument("vocabulary token may not be empty or contain whitespace: '" + t + "'");
      if (!v.index_.emplace(t, static_cast<int>(v.tokens_.size())).second)
        throw InvalidArgument("duplicate vocabulary token '" + t + "'");
      v.tokens_.push_back(t);
    }
    return v;
  }

  std::size_t size() const { return tokens_.size(); }

  bool contains(std::string_view token) const { return index_.find(std::string(token)) != index_.end(); }

  int index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& token_at(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= tokens_.size())
      throw InvalidArgument("token index " + std::to_string(index) + " out of range");
    return tokens_[static_cast<std::size_t>(index)];
  }

  std::vector<int> encode(std::span<const std::string> tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(index_of(t));
    return ids;
  }

  std::vector<std::string> decode(std::span<const int> ids) const {
    std::vector<std::string> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(token_at(id));
    return out;
  }

  std::span<const std::string> regular_tokens() const {
    return std::span<const std::string>(tokens_).subspan(kNumSpecials);
  }

  // One regular token per line; specials are implicit.
  void write(std::ostream& os) const {
    for (const auto& t : regular_tokens()) os << t << '\n';
  }

  static Vocabulary read(std::istream& is) {
    std::vector<std::string> tokens;
    for (std::string line; std::getline(is, line);) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      tokens.push_back(line);
    }
    return from_tokens(tokens);
  }

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Keeps the `capacity` most frequent tokens (ties broken lexicographically).
inline Vocabulary build_vocabulary(std::span<const std::vector<std::string>> corpus,
                                   std::size_t capacity = kDefaultVocabularyCapacity) {
  if (capacity < 1) throw InvalidArgument("vocabulary capacity must be positive");
  std::map<std::string, std::size_t> counts;
  for (const auto& tokens : corpus)
    for (const auto& t : tokens) ++counts[t];
  for (std::string_view special : {"<pad>", "<unk>", "<sos>", "<eos>"}) counts.erase(std::string(special));
  if (counts.empty()) throw InvalidArgument("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > capacity) ranked.resize(capacity);
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [token, count] : ranked) tokens.push_back(std::move(token));
  return Vocabulary::from_tokens(tokens);
}

}  // namespace tonecraft::corpus

#endif  // TONECRAFT_CORPUS_VOCABULARY_HPP
