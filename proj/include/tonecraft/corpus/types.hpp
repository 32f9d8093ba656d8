#ifndef TONECRAFT_CORPUS_TYPES_HPP
#define TONECRAFT_CORPUS_TYPES_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tonecraft/error.hpp"

namespace tonecraft::corpus {

enum class Role { user, agent };

inline std::string_view to_string(Role role) { return role == Role::user ? "user" : "agent"; }

inline Role parse_role(std::string_view text) {
  if (text == "user") return Role::user;
  if (text == "agent") return Role::agent;
  throw InvalidArgument("unknown role '" + std::string(text) + "' (expected user|agent)");
}

struct RawMessage {
  std::string id;
  std::optional<std::string> reply_to;
  Role author_role = Role::user;
  std::string author_id;
  std::int64_t timestamp = 0;
  std::string text;

  bool operator==(const RawMessage&) const = default;
};

// Reply chain before filtering: root first.
using Chain = std::vector<RawMessage>;

struct Utterance {
  Role role = Role::user;
  std::string text;

  bool operator==(const Utterance&) const = default;
};

// Role-alternating exchange between one user and one agent, user first.
struct Conversation {
  std::vector<Utterance> utterances;
  std::string user_id;
  std::string agent_id;

  bool operator==(const Conversation&) const = default;
};

// Scalar tone indicator fed to the decoder.
enum class Tone : int { empathetic = -1, neutral = 0, passionate = 1 };

inline constexpr Tone kAllTones[] = {Tone::empathetic, Tone::neutral, Tone::passionate};

inline int tone_value(Tone tone) { return static_cast<int>(tone); }

inline Tone tone_from_value(int value) {
  if (value < -1 || value > 1)
    throw InvalidArgument("tone indicator must be -1, 0 or +1, got " + std::to_string(value));
  return static_cast<Tone>(value);
}

inline std::string_view tone_name(Tone tone) {
  switch (tone) {
    case Tone::empathetic: return "empathetic";
    case Tone::neutral: return "neutral";
    case Tone::passionate: return "passionate";
  }
  return "neutral";
}

inline std::optional<Tone> parse_tone(std::string_view name) {
  if (name == "empathetic") return Tone::empathetic;
  if (name == "neutral") return Tone::neutral;
  if (name == "passionate") return Tone::passionate;
  return std::nullopt;
}

struct TrainingPair {
  std::vector<int> context;
  std::vector<int> response;  // ends with <eos>
  Tone tone = Tone::neutral;

  bool operator==(const TrainingPair&) const = default;
};

}  // namespace tonecraft::corpus

#endif  // TONECRAFT_CORPUS_TYPES_HPP
