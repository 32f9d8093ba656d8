#ifndef TONECRAFT_HARNESS_SYNTHETIC_HPP
#define TONECRAFT_HARNESS_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonecraft/corpus/pairs.hpp"
#include "tonecraft/corpus/text.hpp"
#include "tonecraft/corpus/types.hpp"
#include "tonecraft/error.hpp"

namespace tonecraft::harness {

using corpus::Conversation;
using corpus::Tone;

/// Template grammar for a synthetic customer-care corpus. Templates use
/// `{slot}` placeholders; one value per slot is drawn for each conversation
/// and shared by all of its turns, so responses can echo the request.
struct SyntheticSpec {
  std::map<std::string, std::vector<std::string>> slots;
  std::vector<std::string> request_templates;
  std::map<Tone, std::vector<std::string>> response_templates;
  std::map<Tone, std::string> markers;  // empathetic and passionate only
  std::map<Tone, double> proportions;
  std::size_t rounds = 1;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticSpec&) const = default;
};

namespace detail {

// Replaces every {name} with its value; unknown slots are an error.
inline std::string fill(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string::npos) throw InvalidArgument("unclosed slot in template: " + tmpl);
      const auto it = values.find(tmpl.substr(i + 1, close - i - 1));
      if (it == values.end()) throw InvalidArgument("unknown slot in template: " + tmpl);
      out += it->second;
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

inline std::vector<std::string> template_slots(const std::string& tmpl) {
  std::vector<std::string> names;
  for (std::size_t i = tmpl.find('{'); i != std::string::npos; i = tmpl.find('{', i + 1)) {
    const auto close = tmpl.find('}', i);
    if (close == std::string::npos) throw InvalidArgument("unclosed slot in template: " + tmpl);
    names.push_back(tmpl.substr(i + 1, close - i - 1));
  }
  return names;
}

inline bool has_token(const std::string& text, const std::string& token) {
  const auto toks = corpus::tokenize(corpus::clean_text(text));
  return std::find(toks.begin(), toks.end(), token) != toks.end();
}

}  // namespace detail

/// Throws InvalidArgument describing the first problem found.
inline void validate(const SyntheticSpec& spec) {
  if (spec.request_templates.empty()) throw InvalidArgument("spec has no request templates");
  if (spec.rounds < 1) throw InvalidArgument("spec rounds must be at least 1");
  double total = 0.0;
  for (Tone t : corpus::kAllTones) {
    const auto p = spec.proportions.find(t);
    const double v = p == spec.proportions.end() ? 0.0 : p->second;
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("tone proportions must be non-negative");
    total += v;
    if (v > 0.0) {
      const auto r = spec.response_templates.find(t);
      if (r == spec.response_templates.end() || r->second.empty())
        throw InvalidArgument("no response templates for tone " + std::string(corpus::tone_name(t)));
    }
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InvalidArgument("tone proportions must sum to 1");
  if (spec.markers.count(Tone::neutral)) throw InvalidArgument("neutral tone takes no marker");
  for (Tone t : {Tone::empathetic, Tone::passionate}) {
    const auto m = spec.markers.find(t);
    if (m == spec.markers.end() || m->second.empty())
      throw InvalidArgument("missing marker for tone " + std::string(corpus::tone_name(t)));
    const auto toks = corpus::tokenize(corpus::clean_text(m->second));
    if (toks.size() != 1 || toks[0] != m->second)
      throw InvalidArgument("marker '" + m->second + "' is not a single clean token");
  }
  if (spec.markers.at(Tone::empathetic) == spec.markers.at(Tone::passionate))
    throw InvalidArgument("markers must differ across tones");
  for (const auto& [name, values] : spec.slots) {
    if (values.empty()) throw InvalidArgument("slot {" + name + "} has no values");
    for (const auto& v : values)
      for (const auto& [t, marker] : spec.markers)
        if (detail::has_token(v, marker)) throw InvalidArgument("slot value '" + v + "' contains a marker");
  }
  auto check_slots = [&](const std::string& tmpl) {
    for (const auto& s : detail::template_slots(tmpl))
      if (!spec.slots.count(s)) throw InvalidArgument("unknown slot {" + s + "} in template: " + tmpl);
    std::map<std::string, std::string> first;
    for (const auto& [name, values] : spec.slots) first[name] = values.front();
    const std::string text = detail::fill(tmpl, first);
    if (corpus::clean_text(text) != text)
      throw InvalidArgument("template is not in cleaned form (lowercase, no numbers or urls): " + tmpl);
    return text;
  };
  for (const auto& r : spec.request_templates) {
    const auto text = check_slots(r);
    if (corpus::tokenize(text).empty()) throw InvalidArgument("request template is empty");
    for (const auto& [t, marker] : spec.markers)
      if (detail::has_token(text, marker)) throw InvalidArgument("request template contains a marker: " + r);
  }
  for (const auto& [tone, templates] : spec.response_templates)
    for (const auto& r : templates) {
      const auto text = check_slots(r);
      for (const auto& [t, marker] : spec.markers)
        if (detail::has_token(text, marker) != (t == tone))
          throw InvalidArgument("response template for " + std::string(corpus::tone_name(tone)) +
                                " must contain exactly its own marker: " + r);
      if (corpus::tokenize(text).empty()) throw InvalidArgument("response template is empty");
    }
}

/// Keyword sets equal to the markers, so pairing recovers each generating tone.
inline corpus::ToneKeywords marker_keywords(const SyntheticSpec& spec) {
  corpus::ToneKeywords k;
  k.empathetic.insert(spec.markers.at(Tone::empathetic));
  k.passionate.insert(spec.markers.at(Tone::passionate));
  return k;
}

/// Number of conversations per tone: floor of each share, remainders handed
/// out by largest fractional part (ties in tone order).
inline std::map<Tone, std::size_t> tone_counts(const SyntheticSpec& spec, std::size_t n) {
  std::map<Tone, std::size_t> counts;
  std::vector<std::pair<double, Tone>> remainders;
  std::size_t assigned = 0;
  for (Tone t : corpus::kAllTones) {
    const auto it = spec.proportions.find(t);
    const double exact = (it == spec.proportions.end() ? 0.0 : it->second) * static_cast<double>(n);
    // guard against 0.3 * 1000 = 299.99999999999994
    const double whole = std::floor(exact + 1e-9);
    counts[t] = static_cast<std::size_t>(whole);
    assigned += counts[t];
    remainders.emplace_back(exact - whole, t);
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
  return counts;
}

struct SyntheticConversation {
  Conversation conversation;
  Tone tone = Tone::neutral;
};

/// n conversations in cleaned form with an exact per-tone partition. The tone
/// order is a seeded shuffle; everything is a pure function of (spec, n, stream).
/// `stream` separates independent draws (training corpus vs held-out requests).
inline std::vector<SyntheticConversation> synth_conversations(const SyntheticSpec& spec, std::size_t n,
                                                              std::uint64_t stream = 0) {
  validate(spec);
  if (n < 1) throw InvalidArgument("synth_corpus needs n >= 1");
  std::vector<Tone> tones;
  for (const auto& [t, c] : tone_counts(spec, n)) tones.insert(tones.end(), c, t);
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(tones.begin(), tones.end(), rng);
  auto pick = [&](const std::vector<std::string>& xs) -> const std::string& {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
  };
  std::vector<SyntheticConversation> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::map<std::string, std::string> values;
    for (const auto& [name, options] : spec.slots) values[name] = pick(options);
    SyntheticConversation sc;
    sc.tone = tones[k];
    sc.conversation.user_id = "user" + std::to_string(k);
    sc.conversation.agent_id = "agent";
    for (std::size_t r = 0; r < spec.rounds; ++r) {
      sc.conversation.utterances.push_back({corpus::Role::user, detail::fill(pick(spec.request_templates), values)});
      sc.conversation.utterances.push_back(
          {corpus::Role::agent, detail::fill(pick(spec.response_templates.at(sc.tone)), values)});
    }
    out.push_back(std::move(sc));
  }
  return out;
}

inline std::vector<Conversation> synth_corpus(const SyntheticSpec& spec, std::size_t n, std::uint64_t stream = 0) {
  std::vector<Conversation> out;
  for (auto& sc : synth_conversations(spec, n, stream)) out.push_back(std::move(sc.conversation));
  return out;
}

/// Flattens conversations into a reply-linked archive. Message ids count up
/// from `first_id`; timestamps follow the same order.
inline std::vector<corpus::RawMessage> to_raw_messages(std::span<const Conversation> convs, std::uint64_t first_id = 1) {
  std::vector<corpus::RawMessage> out;
  std::uint64_t id = first_id;
  for (const auto& c : convs) {
    std::optional<std::string> parent;
    for (const auto& u : c.utterances) {
      corpus::RawMessage m;
      m.id = std::to_string(id);
      m.reply_to = parent;
      m.author_role = u.role;
      m.author_id = u.role == corpus::Role::user ? c.user_id : c.agent_id;
      m.timestamp = static_cast<std::int64_t>(id);
      m.text = u.text;
      parent = m.id;
      out.push_back(std::move(m));
      ++id;
    }
  }
  return out;
}

/// A small customer-care grammar whose cleaned vocabulary fits in about 200
/// tokens. "sorry" marks empathy and "!" marks passion.
inline SyntheticSpec default_spec(std::uint64_t seed = 7) {
  SyntheticSpec s;
  s.seed = seed;
  s.slots["product"] = {"wifi", "router", "phone", "laptop", "tablet", "account", "order", "package",
                        "bill", "card", "app", "printer", "tv", "modem", "subscription", "refund"};
  s.slots["problem"] = {"is not working", "keeps crashing", "is broken", "stopped working", "is very slow",
                        "will not turn on", "is missing", "got cancelled", "is late", "was charged twice"};
  s.slots["when"] = {"today", "since yesterday", "all week", "this morning", "again", "every night", "for days"};
  s.slots["place"] = {"at home", "in the store", "at work", "online", "on the website"};
  s.slots["fix"] = {"restart it", "check the settings", "update the app", "reset the password", "clear the cache",
                    "try another cable", "sign in again"};
  s.request_templates = {
      "my {product} {problem} {when}",
      "hey , my {product} {problem}",
      "why is it that my {product} {problem} {place}",
      "my {product} {problem} {place} . help",
      "can anyone help ? my {product} {problem} {when}",
      "so my {product} {problem} {when} . what now",
      "my {product} {problem} {place} and nobody answers",
      "{when} my {product} {problem}",
  };
  s.response_templates[Tone::empathetic] = {
      "we are so sorry about your {product} . please {fix} and let us know",
      "sorry to hear that your {product} {problem} . please dm us",
      "so sorry for the trouble with your {product} . can you {fix} ?",
      "we are sorry about this . please {fix} and dm us the details",
  };
  s.response_templates[Tone::neutral] = {
      "please {fix} and let us know if your {product} still {problem}",
      "please dm us your account details about the {product}",
      "can you {fix} ? then send us a dm",
      "thanks for reaching out . please {fix} and tell us what happens",
  };
  s.response_templates[Tone::passionate] = {
      "we are on it ! please {fix} and your {product} will be great",
      "great question ! please {fix} and dm us",
      "thanks for reaching out ! we would love to help with your {product}",
      "happy to help ! can you {fix} ? we will sort it out",
  };
  s.markers[Tone::empathetic] = "sorry";
  s.markers[Tone::passionate] = "!";
  s.proportions = {{Tone::empathetic, 1.0 / 3}, {Tone::neutral, 1.0 / 3}, {Tone::passionate, 1.0 / 3}};
  return s;
}

inline nlohmann::json to_json(const SyntheticSpec& s) {
  nlohmann::json j;
  j["seed"] = s.seed;
  j["rounds"] = s.rounds;
  j["slots"] = s.slots;
  j["request_templates"] = s.request_templates;
  for (const auto& [t, v] : s.response_templates) j["response_templates"][std::string(corpus::tone_name(t))] = v;
  for (const auto& [t, v] : s.markers) j["markers"][std::string(corpus::tone_name(t))] = v;
  for (const auto& [t, v] : s.proportions) j["proportions"][std::string(corpus::tone_name(t))] = v;
  return j;
}

inline SyntheticSpec spec_from_json(const nlohmann::json& j) {
  auto tone_of = [](const std::string& name) {
    const auto t = corpus::parse_tone(name);
    if (!t) throw InvalidArgument("unknown tone '" + name + "' in spec");
    return *t;
  };
  SyntheticSpec s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    s.rounds = j.value("rounds", std::size_t{1});
    s.slots = j.value("slots", std::map<std::string, std::vector<std::string>>{});
    s.request_templates = j.at("request_templates").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("response_templates").items())
      s.response_templates[tone_of(k)] = v.get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("markers").items()) s.markers[tone_of(k)] = v.get<std::string>();
    for (const auto& [k, v] : j.at("proportions").items()) s.proportions[tone_of(k)] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed synthetic spec: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace tonecraft::harness

#endif  // TONECRAFT_HARNESS_SYNTHETIC_HPP
