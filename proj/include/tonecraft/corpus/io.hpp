#ifndef TONECRAFT_CORPUS_IO_HPP
#define TONECRAFT_CORPUS_IO_HPP

#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonecraft/corpus/pairs.hpp"
#include "tonecraft/corpus/types.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::corpus {

using json = nlohmann::json;

namespace detail {

// Ids may arrive as JSON strings or integers.
inline std::string id_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<std::int64_t>());
  if (j.is_number_unsigned()) return std::to_string(j.get<std::uint64_t>());
  throw ArchiveError("message id must be a string or integer");
}

}  // namespace detail

inline RawMessage raw_message_from_json(const json& j) {
  RawMessage m;
  m.id = detail::id_from_json(j.at("id"));
  if (auto it = j.find("reply_to"); it != j.end() && !it->is_null()) m.reply_to = detail::id_from_json(*it);
  m.author_role = parse_role(j.at("author_role").get<std::string>());
  m.author_id = detail::id_from_json(j.at("author_id"));
  m.timestamp = j.at("timestamp").get<std::int64_t>();
  m.text = j.at("text").get<std::string>();
  return m;
}

inline json to_json(const RawMessage& m) {
  return json{{"id", m.id},
              {"reply_to", m.reply_to ? json(*m.reply_to) : json(nullptr)},
              {"author_role", std::string(to_string(m.author_role))},
              {"author_id", m.author_id},
              {"timestamp", m.timestamp},
              {"text", m.text}};
}

inline json to_json(const Conversation& c) {
  json utterances = json::array();
  for (const auto& u : c.utterances) utterances.push_back({{"role", std::string(to_string(u.role))}, {"text", u.text}});
  return json{{"user_id", c.user_id}, {"agent_id", c.agent_id}, {"utterances", std::move(utterances)}};
}

inline Conversation conversation_from_json(const json& j) {
  Conversation c;
  c.user_id = j.at("user_id").get<std::string>();
  c.agent_id = j.at("agent_id").get<std::string>();
  for (const auto& u : j.at("utterances"))
    c.utterances.push_back({parse_role(u.at("role").get<std::string>()), u.at("text").get<std::string>()});
  return c;
}

inline json to_json(const TrainingPair& p) {
  return json{{"context", p.context}, {"response", p.response}, {"tone", tone_value(p.tone)}};
}

inline TrainingPair pair_from_json(const json& j) {
  TrainingPair p;
  p.context = j.at("context").get<std::vector<int>>();
  p.response = j.at("response").get<std::vector<int>>();
  p.tone = tone_from_value(j.at("tone").get<int>());
  return p;
}

inline json to_json(const ToneKeywords& k) {
  return json{{"empathetic", k.empathetic}, {"passionate", k.passionate}};
}

inline ToneKeywords keywords_from_json(const json& j) {
  ToneKeywords k;
  if (j.contains("empathetic")) k.empathetic = j.at("empathetic").get<std::set<std::string>>();
  if (j.contains("passionate")) k.passionate = j.at("passionate").get<std::set<std::string>>();
  return k;
}

/// Calls `fn` for every non-blank line, parsed as JSON. Parse failures name the line.
inline void for_each_jsonl(std::istream& is, const std::function<void(const json&)>& fn) {
  std::size_t line_no = 0;
  for (std::string line; std::getline(is, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
      fn(j);
    } catch (const json::exception& e) {
      throw ArchiveError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw ArchiveError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

template <class T, class Parse>
std::vector<T> read_jsonl(std::istream& is, Parse parse) {
  std::vector<T> out;
  for_each_jsonl(is, [&](const json& j) { out.push_back(parse(j)); });
  return out;
}

template <class Range>
void write_jsonl(std::ostream& os, const Range& items) {
  for (const auto& item : items) os << to_json(item).dump() << '\n';
}

inline std::vector<RawMessage> read_archive(std::istream& is) {
  return read_jsonl<RawMessage>(is, raw_message_from_json);
}

inline std::vector<Conversation> read_conversations(std::istream& is) {
  return read_jsonl<Conversation>(is, conversation_from_json);
}

inline std::vector<TrainingPair> read_pairs(std::istream& is) { return read_jsonl<TrainingPair>(is, pair_from_json); }

}  // namespace tonecraft::corpus

#endif  // TONECRAFT_CORPUS_IO_HPP
