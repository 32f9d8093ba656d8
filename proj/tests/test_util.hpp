#ifndef TONECRAFT_TESTS_TEST_UTIL_HPP
#define TONECRAFT_TESTS_TEST_UTIL_HPP

#include <array>
#include <random>
#include <string>
#include <string_view>

namespace tonecraft::testing {

// Tweet-like strings stitched from fragments that stress the cleaner:
// mentions, hashtags, URLs, numbers glued to letters and punctuation.
template <class Rng>
std::string random_messy_text(Rng& rng) {
  static constexpr std::array<std::string_view, 34> kFragments = {
      "@", "#", "http://", "https://", "www.", "t.co/", "Ab", "x", "Hello", "42", "3.5", ".", ":", "6:30",
      " ", "  ", "\t", "\n", "(", ")", "\"", "'", "!", "?", "<<", ">>", "<<url>>", "<<number>>", "_", "9a",
      "é", "@@", "#1", ":-D"};
  std::uniform_int_distribution<std::size_t> pick(0, kFragments.size() - 1);
  std::uniform_int_distribution<int> len(0, 16);
  std::string out;
  for (int n = len(rng); n > 0; --n) out += kFragments[pick(rng)];
  return out;
}

}  // namespace tonecraft::testing

#endif  // TONECRAFT_TESTS_TEST_UTIL_HPP
