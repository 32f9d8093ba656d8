#ifndef TONECRAFT_CORPUS_THREADS_HPP
#define TONECRAFT_CORPUS_THREADS_HPP

#include <algorithm>
#include <cctype>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tonecraft/corpus/text.hpp"
#include "tonecraft/corpus/types.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::corpus {

namespace detail {

inline bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Numeric ids compare by value, everything else bytewise; numeric ids sort first.
inline bool id_less(const std::string& a, const std::string& b) {
  const bool na = all_digits(a), nb = all_digits(b);
  if (na != nb) return na;
  if (na && a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

inline bool chronological(const RawMessage& a, const RawMessage& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return id_less(a.id, b.id);
}

}  // namespace detail

/// Rebuilds reply chains by matching ids against reply_to links.
///
/// Every message lands in exactly one chain. A message whose reply_to names an
/// id that is not in the archive roots a new chain. When several messages reply
/// to the same parent, the chronologically first one (timestamp, then id)
/// continues the parent's chain and each later sibling roots a chain of its own.
/// Chains are returned ordered by their root's (timestamp, id), so the output
/// does not depend on input order.
///
/// Throws ArchiveError on duplicate ids, self replies and reply cycles.
inline std::vector<Chain> reconstruct_threads(std::span<const RawMessage> messages) {
  std::unordered_map<std::string, std::size_t> by_id;
  by_id.reserve(messages.size());
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const auto& m = messages[i];
    if (!by_id.emplace(m.id, i).second) throw ArchiveError("duplicate message id '" + m.id + "'");
    if (m.reply_to && *m.reply_to == m.id) throw ArchiveError("message '" + m.id + "' replies to itself");
  }

  std::vector<std::vector<std::size_t>> children(messages.size());
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const auto& m = messages[i];
    auto parent = m.reply_to ? by_id.find(*m.reply_to) : by_id.end();
    if (parent == by_id.end())
      roots.push_back(i);
    else
      children[parent->second].push_back(i);
  }
  auto earlier = [&](std::size_t a, std::size_t b) { return detail::chronological(messages[a], messages[b]); };
  for (auto& c : children) std::sort(c.begin(), c.end(), earlier);

  // Later siblings become roots of their own chains.
  std::vector<std::size_t> pending = roots;
  for (const auto& c : children)
    for (std::size_t k = 1; k < c.size(); ++k) pending.push_back(c[k]);
  std::sort(pending.begin(), pending.end(), earlier);

  std::vector<Chain> chains;
  chains.reserve(pending.size());
  std::size_t visited = 0;
  for (std::size_t root : pending) {
    Chain chain;
    for (std::size_t at = root;;) {
      chain.push_back(messages[at]);
      ++visited;
      if (children[at].empty()) break;
      at = children[at].front();
    }
    chains.push_back(std::move(chain));
  }
  if (visited != messages.size())
    throw ArchiveError("reply cycle detected: " + std::to_string(messages.size() - visited) +
                       " message(s) never reach a root");
  return chains;
}

inline bool is_valid_conversation(const Chain& chain) {
  if (chain.size() < 2) return false;
  if (chain.front().author_role != Role::user) return false;
  const std::string& user = chain[0].author_id;
  const std::string& agent = chain[1].author_id;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::user : Role::agent;
    if (chain[i].author_role != expected) return false;
    if (chain[i].author_id != (expected == Role::user ? user : agent)) return false;
  }
  return true;
}

/// Keeps user-initiated, strictly alternating chains of at least two messages
/// between exactly one user and one agent, and cleans their text.
inline std::vector<Conversation> filter_conversations(std::span<const Chain> chains) {
  std::vector<Conversation> out;
  for (const auto& chain : chains) {
    if (!is_valid_conversation(chain)) continue;
    Conversation conv;
    conv.user_id = chain[0].author_id;
    conv.agent_id = chain[1].author_id;
    conv.utterances.reserve(chain.size());
    for (const auto& m : chain) conv.utterances.push_back({m.author_role, clean_text(m.text)});
    out.push_back(std::move(conv));
  }
  return out;
}

}  // namespace tonecraft::corpus

#endif  // TONECRAFT_CORPUS_THREADS_HPP
