#ifndef TONECRAFT_SERVICE_API_HPP
#define TONECRAFT_SERVICE_API_HPP

#include <chrono>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tonecraft/corpus/pairs.hpp"
#include "tonecraft/corpus/text.hpp"
#include "tonecraft/corpus/types.hpp"
#include "tonecraft/neural/checkpoint.hpp"
#include "tonecraft/neural/model.hpp"

namespace tonecraft::service {

using nlohmann::json;

// Status and JSON body of one HTTP answer; transport-independent so the
// handlers can be tested without sockets.
struct Reply {
  int status = 200;
  json body;
};

inline Reply error_reply(int status, std::string code, std::string message) {
  return {status, {{"error", {{"code", std::move(code)}, {"message", std::move(message)}}}}};
}

struct RespondRequest {
  std::vector<corpus::Utterance> conversation;
  std::optional<corpus::Tone> tone;
};

struct ToneResponse {
  corpus::Tone tone;
  std::string text;
  neural::StopReason stop_reason;
};

// Client-facing rejection; becomes a 400 with `code`.
struct BadRequest {
  std::string code;
  std::string message;
};

inline std::string admissible_tones() { return "empathetic|neutral|passionate"; }

/// Parses and checks a request body. Returns the failure instead of throwing.
inline std::variant<RespondRequest, BadRequest> parse_request(const std::string& body, bool tone_required) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    return BadRequest{"malformed_request", "body is not valid JSON"};
  }
  if (!j.is_object()) return BadRequest{"malformed_request", "body must be a JSON object"};
  RespondRequest req;
  const auto conv = j.find("conversation");
  if (conv == j.end() || !conv->is_array()) return BadRequest{"malformed_request", "'conversation' must be an array"};
  if (conv->empty()) return BadRequest{"invalid_conversation", "conversation is empty"};
  for (const auto& turn : *conv) {
    if (!turn.is_object() || !turn.contains("role") || !turn.contains("text") || !turn["role"].is_string() ||
        !turn["text"].is_string())
      return BadRequest{"malformed_request", "every turn needs string 'role' and 'text'"};
    const auto role = turn["role"].get<std::string>();
    if (role != "user" && role != "agent")
      return BadRequest{"invalid_conversation", "role must be user or agent, got '" + role + "'"};
    req.conversation.push_back({corpus::parse_role(role), turn["text"].get<std::string>()});
  }
  if (req.conversation.back().role != corpus::Role::user)
    return BadRequest{"invalid_conversation", "conversation must end with a user turn"};
  const auto tone = j.find("tone");
  if (tone != j.end() && !tone->is_null()) {
    if (!tone->is_string()) return BadRequest{"unknown_tone", "tone must be one of " + admissible_tones()};
    req.tone = corpus::parse_tone(tone->get<std::string>());
    if (!req.tone)
      return BadRequest{"unknown_tone",
                        "unknown tone '" + tone->get<std::string>() + "'; expected one of " + admissible_tones()};
  } else if (tone_required) {
    return BadRequest{"unknown_tone", "missing tone; expected one of " + admissible_tones()};
  }
  return req;
}

/// Every turn cleaned and tokenized, joined with the turn separator, then
/// mapped to ids.
inline std::vector<int> context_ids(std::span<const corpus::Utterance> conversation, const corpus::Vocabulary& vocab) {
  std::vector<std::vector<std::string>> turns;
  for (const auto& u : conversation) turns.push_back(corpus::tokenize(corpus::clean_text(u.text)));
  return vocab.encode(corpus::join_turns(turns));
}

inline std::string detokenize(const corpus::Vocabulary& vocab, std::span<const int> ids) {
  std::string out;
  for (int id : ids) {
    if (!out.empty()) out += ' ';
    out += vocab.token_at(id);
  }
  return out;
}

/// Greedy responses for each tone in `tones`, sharing one encoder pass.
inline std::vector<ToneResponse> respond(const neural::LoadedModel& model, std::span<const corpus::Utterance> conversation,
                                         std::span<const corpus::Tone> tones) {
  const auto ids = context_ids(conversation, model.vocabulary);
  if (ids.empty()) throw InvalidArgument("conversation has no tokens after cleaning");
  const auto encoded = neural::encode(model.params, ids);
  std::vector<ToneResponse> out;
  for (auto t : tones) {
    const auto g = neural::decode_greedy(model.params, encoded, t, model.config.max_decode_steps);
    out.push_back({t, detokenize(model.vocabulary, g.tokens), g.stop_reason});
  }
  return out;
}

inline Reply handle_respond_impl(const neural::LoadedModel* model, const std::string& body, bool all) {
  const auto start = std::chrono::steady_clock::now();
  if (!model) return error_reply(503, "no_checkpoint", "no checkpoint is loaded");
  const auto parsed = parse_request(body, !all);
  if (const auto* bad = std::get_if<BadRequest>(&parsed)) return error_reply(400, bad->code, bad->message);
  const auto& req = std::get<RespondRequest>(parsed);
  std::vector<corpus::Tone> tones;
  if (all)
    tones.assign(std::begin(corpus::kAllTones), std::end(corpus::kAllTones));
  else
    tones.push_back(*req.tone);
  std::vector<ToneResponse> responses;
  try {
    responses = respond(*model, req.conversation, tones);
  } catch (const InvalidArgument& e) {
    return error_reply(400, "empty_context", e.what());
  }
  json list = json::array();
  for (const auto& r : responses)
    list.push_back({{"tone", corpus::tone_name(r.tone)}, {"text", r.text}, {"stop_reason", neural::to_string(r.stop_reason)}});
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {200, {{"responses", list}, {"model", model->id}, {"elapsed_ms", elapsed}}};
}

/// POST /v1/respond
inline Reply handle_respond(const neural::LoadedModel* model, const std::string& body) {
  return handle_respond_impl(model, body, false);
}

/// POST /v1/respond_all; order is empathetic, neutral, passionate.
inline Reply handle_respond_all(const neural::LoadedModel* model, const std::string& body) {
  return handle_respond_impl(model, body, true);
}

/// GET /v1/health
inline Reply handle_health(const neural::LoadedModel* model) {
  return {200, {{"status", "ok"}, {"checkpoint", model ? json(model->id) : json(nullptr)}}};
}

}  // namespace tonecraft::service

#endif  // TONECRAFT_SERVICE_API_HPP
