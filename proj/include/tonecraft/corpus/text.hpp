#ifndef TONECRAFT_CORPUS_TEXT_HPP
#define TONECRAFT_CORPUS_TEXT_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace tonecraft::corpus {

inline constexpr std::string_view kUrlToken = "<<url>>";
inline constexpr std::string_view kNumberToken = "<<number>>";

// Emoticons kept as single tokens. Matching ignores ASCII case.
inline constexpr std::array<std::string_view, 14> kEmoticons = {
    ":-)", ":)", ":-(", ":(", ":-D", ":D", ";-)", ";)", ":-P", ":P", ":'(", "<3", ":o", "=)"};

namespace detail {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

// Letters, digits, underscore and any non-ASCII byte.
inline bool is_word(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

inline bool is_letter(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalpha(u) || c == '_';
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool iequals_at(std::string_view s, std::size_t pos, std::string_view what) {
  if (pos + what.size() > s.size()) return false;
  for (std::size_t i = 0; i < what.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != std::tolower(static_cast<unsigned char>(what[i])))
      return false;
  return true;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

// "@name" or "#tag", possibly behind opening brackets or quotes.
inline bool is_mention_or_hashtag(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size() && std::string_view("([{\"'").find(token[i]) != std::string_view::npos) ++i;
  return i + 1 < token.size() && (token[i] == '@' || token[i] == '#') && is_word(token[i + 1]);
}

inline std::size_t find_url(std::string_view token) {
  std::size_t best = std::string_view::npos;
  for (std::string_view scheme : {"http://", "https://"}) best = std::min(best, token.find(scheme));
  if (token.rfind("www.", 0) == 0) best = 0;
  return best;
}

inline std::string replace_url(std::string_view token) {
  const std::size_t start = find_url(token);
  if (start == std::string_view::npos) return std::string(token);
  std::size_t end = token.size();
  while (end > start && std::string_view(".,!?;:)]}\"'").find(token[end - 1]) != std::string_view::npos) --end;
  return std::string(token.substr(0, start)) + std::string(kUrlToken) + std::string(token.substr(end));
}

// Digit runs (with at most one inner decimal point) not glued to letters.
inline std::string replace_numbers(std::string_view token) {
  std::string out;
  std::size_t i = 0;
  while (i < token.size()) {
    if (!is_digit(token[i]) || (i > 0 && (is_letter(token[i - 1]) || is_digit(token[i - 1])))) {
      out += token[i++];
      continue;
    }
    std::size_t j = i;
    while (j < token.size() && is_digit(token[j])) ++j;
    if (j + 1 < token.size() && token[j] == '.' && is_digit(token[j + 1])) {
      ++j;
      while (j < token.size() && is_digit(token[j])) ++j;
    }
    if (j < token.size() && is_letter(token[j]))
      out.append(token.substr(i, j - i));
    else
      out += kNumberToken;
    i = j;
  }
  return out;
}

}  // namespace detail

/// Lowercases, drops whole @mention and #hashtag tokens, replaces URLs with
/// <<url>> and standalone numbers with <<number>>, and collapses whitespace.
/// Idempotent.
inline std::string clean_text(std::string_view raw) {
  const std::string lower = detail::ascii_lower(raw);
  std::string out;
  for (std::string_view token : detail::split_ws(lower)) {
    if (detail::is_mention_or_hashtag(token)) continue;
    const std::string replaced = detail::replace_numbers(detail::replace_url(token));
    if (!out.empty()) out += ' ';
    out += replaced;
  }
  return out;
}

namespace detail {

inline std::size_t match_emoticon(std::string_view s, std::size_t pos) {
  std::size_t best = 0;
  for (std::string_view e : kEmoticons)
    if (e.size() > best && iequals_at(s, pos, e)) best = e.size();
  return best;
}

inline std::size_t match_placeholder(std::string_view s, std::size_t pos) {
  for (std::string_view p : {kUrlToken, kNumberToken})
    if (s.substr(pos, p.size()) == p) return p.size();
  return 0;
}

// Splits one placeholder-free segment: leading and trailing punctuation
// (or emoticons) peel off one token at a time, the core stays whole.
inline void tokenize_segment(std::string_view seg, std::vector<std::string>& out) {
  std::vector<std::string> tail;
  std::size_t begin = 0, end = seg.size();
  while (begin < end && is_punct(seg[begin])) {
    std::size_t n = match_emoticon(seg.substr(0, end), begin);
    if (n > 0 && begin + n < end && std::isalnum(static_cast<unsigned char>(seg[begin + n]))) n = 0;
    if (n == 0) n = 1;
    out.emplace_back(seg.substr(begin, n));
    begin += n;
  }
  while (end > begin && is_punct(seg[end - 1])) {
    std::size_t n = 1;
    for (std::string_view e : kEmoticons) {
      if (e.size() <= n || e.size() > end - begin || !iequals_at(seg, end - e.size(), e)) continue;
      const bool ends_alnum = std::isalnum(static_cast<unsigned char>(e.back())) != 0;
      const std::size_t before = end - e.size();
      if (ends_alnum && before > begin && std::isalnum(static_cast<unsigned char>(seg[before - 1]))) continue;
      n = e.size();
    }
    tail.emplace_back(seg.substr(end - n, n));
    end -= n;
  }
  if (end > begin) out.emplace_back(seg.substr(begin, end - begin));
  out.insert(out.end(), tail.rbegin(), tail.rend());
}

}  // namespace detail

/// Splits cleaned text on whitespace, then separates leading and trailing
/// punctuation. Placeholders, emoticons and word-internal apostrophes survive.
inline std::vector<std::string> tokenize(std::string_view cleaned) {
  std::vector<std::string> out;
  for (std::string_view chunk : detail::split_ws(cleaned)) {
    if (detail::match_emoticon(chunk, 0) == chunk.size()) {
      out.emplace_back(chunk);
      continue;
    }
    std::size_t seg_start = 0;
    for (std::size_t i = 0; i < chunk.size();) {
      const std::size_t n = detail::match_placeholder(chunk, i);
      if (n == 0) {
        ++i;
        continue;
      }
      if (i > seg_start) detail::tokenize_segment(chunk.substr(seg_start, i - seg_start), out);
      out.emplace_back(chunk.substr(i, n));
      i += n;
      seg_start = i;
    }
    if (seg_start < chunk.size()) detail::tokenize_segment(chunk.substr(seg_start), out);
  }
  return out;
}

}  // namespace tonecraft::corpus

#endif  // TONECRAFT_CORPUS_TEXT_HPP
