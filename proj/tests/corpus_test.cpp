#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tonecraft/corpus.hpp"

namespace tc = tonecraft::corpus;
using tc::Role;

namespace {

tc::RawMessage msg(std::string id, std::optional<std::string> reply_to, Role role, std::string author, std::int64_t ts,
                   std::string text = "hello") {
  return {std::move(id), std::move(reply_to), role, std::move(author), ts, std::move(text)};
}

std::vector<std::string> ids_of(const tc::Chain& chain) {
  std::vector<std::string> out;
  for (const auto& m : chain) out.push_back(m.id);
  return out;
}

}  // namespace

TEST(ReconstructThreads, LinearChain) {
  std::vector<tc::RawMessage> messages = {msg("1", std::nullopt, Role::user, "u", 10),
                                          msg("2", "1", Role::agent, "a", 20), msg("3", "2", Role::user, "u", 30)};
  auto chains = tc::reconstruct_threads(messages);
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(ids_of(chains[0]), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(ReconstructThreads, ShuffledInputGivesSameOutput) {
  std::vector<tc::RawMessage> messages;
  for (int c = 0; c < 20; ++c) {
    const std::string base = std::to_string(c * 10);
    messages.push_back(msg(base + "0", std::nullopt, Role::user, "u" + base, c * 100));
    messages.push_back(msg(base + "1", base + "0", Role::agent, "a", c * 100 + 5));
    messages.push_back(msg(base + "2", base + "1", Role::user, "u" + base, c * 100 + 9));
  }
  const auto expected = tc::reconstruct_threads(messages);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(messages.begin(), messages.end(), rng);
    EXPECT_EQ(tc::reconstruct_threads(messages), expected);
  }
}

TEST(ReconstructThreads, OrphanRootsNewChain) {
  std::vector<tc::RawMessage> messages = {msg("2", "missing", Role::agent, "a", 20), msg("3", "2", Role::user, "u", 30)};
  auto chains = tc::reconstruct_threads(messages);
  ASSERT_EQ(chains.size(), 1u);
  EXPECT_EQ(ids_of(chains[0]), (std::vector<std::string>{"2", "3"}));
}

TEST(ReconstructThreads, LaterSiblingStartsOwnChain) {
  std::vector<tc::RawMessage> messages = {msg("1", std::nullopt, Role::user, "u", 10),
                                          msg("3", "1", Role::agent, "a", 30), msg("2", "1", Role::agent, "a", 20)};
  auto chains = tc::reconstruct_threads(messages);
  ASSERT_EQ(chains.size(), 2u);
  EXPECT_EQ(ids_of(chains[0]), (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(ids_of(chains[1]), (std::vector<std::string>{"3"}));
}

TEST(ReconstructThreads, NumericIdsTieBreakByValue) {
  std::vector<tc::RawMessage> messages = {msg("10", std::nullopt, Role::user, "u", 5),
                                          msg("9", std::nullopt, Role::user, "v", 5)};
  auto chains = tc::reconstruct_threads(messages);
  ASSERT_EQ(chains.size(), 2u);
  EXPECT_EQ(chains[0][0].id, "9");
}

TEST(ReconstructThreads, MalformedArchives) {
  std::vector<tc::RawMessage> dup = {msg("1", std::nullopt, Role::user, "u", 1), msg("1", std::nullopt, Role::user, "u", 2)};
  EXPECT_THROW(tc::reconstruct_threads(dup), tonecraft::ArchiveError);
  std::vector<tc::RawMessage> self = {msg("1", "1", Role::user, "u", 1)};
  EXPECT_THROW(tc::reconstruct_threads(self), tonecraft::ArchiveError);
  std::vector<tc::RawMessage> cycle = {msg("1", "2", Role::user, "u", 1), msg("2", "1", Role::agent, "a", 2)};
  EXPECT_THROW(tc::reconstruct_threads(cycle), tonecraft::ArchiveError);
}

TEST(ReconstructThreads, PartitionsRandomForests) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<tc::RawMessage> messages;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < n; ++i) {
      std::optional<std::string> parent;
      const int r = std::uniform_int_distribution<int>(-3, i - 1)(rng);
      if (r >= 0) parent = std::to_string(r);
      if (r == -3) parent = "gone" + std::to_string(i);
      messages.push_back(msg(std::to_string(i), parent, i % 2 ? Role::agent : Role::user, "x",
                             std::uniform_int_distribution<int>(0, 5)(rng)));
    }
    const auto chains = tc::reconstruct_threads(messages);
    std::size_t total = 0;
    std::set<std::string> seen;
    for (const auto& c : chains) {
      total += c.size();
      for (const auto& m : c) seen.insert(m.id);
      for (std::size_t k = 1; k < c.size(); ++k) EXPECT_EQ(c[k].reply_to, c[k - 1].id);
    }
    EXPECT_EQ(total, messages.size());
    EXPECT_EQ(seen.size(), messages.size());
  }
}

TEST(FilterConversations, DropsInvalidChains) {
  auto u = [](std::string id, std::string author = "u") { return msg(id, std::nullopt, Role::user, author, 0); };
  auto a = [](std::string id, std::string author = "a") { return msg(id, std::nullopt, Role::agent, author, 0); };
  std::vector<tc::Chain> chains = {
      {u("1")},                       // single tweet
      {a("2"), u("3")},               // agent-initiated
      {u("4"), u("5"), a("6")},       // user twice in a row
      {u("7"), a("8"), u("9", "w")},  // second user
      {u("10"), a("11"), u("12"), a("13", "b")},  // second agent
      {u("14"), a("15")},             // valid
  };
  auto convs = tc::filter_conversations(chains);
  ASSERT_EQ(convs.size(), 1u);
  EXPECT_EQ(convs[0].user_id, "u");
  EXPECT_EQ(convs[0].agent_id, "a");
  EXPECT_EQ(convs[0].utterances.size(), 2u);
}

TEST(FilterConversations, OutputAlwaysSatisfiesInvariants) {
  std::mt19937 rng(5);
  std::vector<tc::Chain> chains;
  for (int i = 0; i < 2000; ++i) {
    tc::Chain c;
    const int len = std::uniform_int_distribution<int>(0, 6)(rng);
    for (int k = 0; k < len; ++k) {
      const bool is_user = std::bernoulli_distribution(0.5)(rng);
      const std::string author = (is_user ? "u" : "a") + std::to_string(std::uniform_int_distribution<int>(0, 1)(rng));
      c.push_back(msg(std::to_string(k), std::nullopt, is_user ? Role::user : Role::agent, author, k, "Hi @x 42"));
    }
    chains.push_back(std::move(c));
  }
  const auto convs = tc::filter_conversations(chains);
  EXPECT_FALSE(convs.empty());
  for (const auto& conv : convs) {
    ASSERT_GE(conv.utterances.size(), 2u);
    for (std::size_t k = 0; k < conv.utterances.size(); ++k) {
      EXPECT_EQ(conv.utterances[k].role, k % 2 == 0 ? Role::user : Role::agent);
      EXPECT_EQ(conv.utterances[k].text, "hi <<number>>");
    }
  }
}

TEST(CleanText, RemovesMentionsAndHashtags) {
  EXPECT_EQ(tc::clean_text("@AppleSupport my phone died"), "my phone died");
  EXPECT_EQ(tc::clean_text("loving it #blessed #ad"), "loving it");
  EXPECT_EQ(tc::clean_text("(@united) why"), "why");
  EXPECT_EQ(tc::clean_text("mail me at a@b.com"), "mail me at a@b.com");
}

TEST(CleanText, ReplacesUrlsAndNumbers) {
  EXPECT_EQ(tc::clean_text("track at https://t.co/ab 2 days"), "track at <<url>> <<number>> days");
  EXPECT_EQ(tc::clean_text("see www.apple.com/support."), "see <<url>>.");
  EXPECT_EQ(tc::clean_text("at 6:30 tonight"), "at <<number>>:<<number>> tonight");
  EXPECT_EQ(tc::clean_text("costs 3.99 now"), "costs <<number>> now");
  EXPECT_EQ(tc::clean_text("my iphone7 and 2nd try"), "my iphone7 and 2nd try");
}

TEST(CleanText, NormalizesWhitespaceAndCase) {
  EXPECT_EQ(tc::clean_text(""), "");
  EXPECT_EQ(tc::clean_text("   "), "");
  EXPECT_EQ(tc::clean_text("  Hello\t\nWORLD  "), "hello world");
}

TEST(CleanText, IdempotentOnRandomStrings) {
  std::mt19937 rng(17);
  for (int i = 0; i < 2000; ++i) {
    const std::string s = tonecraft::testing::random_messy_text(rng);
    const std::string once = tc::clean_text(s);
    EXPECT_EQ(tc::clean_text(once), once) << "input: " << s;
  }
}

TEST(Tokenize, SplitsPunctuation) {
  EXPECT_EQ(tc::tokenize("hi there!"), (std::vector<std::string>{"hi", "there", "!"}));
  EXPECT_EQ(tc::tokenize("\"quoted,\" he said..."),
            (std::vector<std::string>{"\"", "quoted", ",", "\"", "he", "said", ".", ".", "."}));
  EXPECT_EQ(tc::tokenize("don't we're"), (std::vector<std::string>{"don't", "we're"}));
}

TEST(Tokenize, KeepsPlaceholdersAtomic) {
  EXPECT_EQ(tc::tokenize("<<url>>"), (std::vector<std::string>{"<<url>>"}));
  EXPECT_EQ(tc::tokenize("<<number>>:<<number>>"), (std::vector<std::string>{"<<number>>", ":", "<<number>>"}));
  EXPECT_EQ(tc::tokenize("see:<<url>>."), (std::vector<std::string>{"see", ":", "<<url>>", "."}));
}

TEST(Tokenize, KeepsEmoticonsAtomic) {
  EXPECT_EQ(tc::tokenize("we love it :)"), (std::vector<std::string>{"we", "love", "it", ":)"}));
  EXPECT_EQ(tc::tokenize(":-D <3 :("), (std::vector<std::string>{":-D", "<3", ":("}));
  EXPECT_EQ(tc::tokenize("great:)"), (std::vector<std::string>{"great", ":)"}));
  EXPECT_EQ(tc::tokenize("(:-d)"), (std::vector<std::string>{"(", ":-d", ")"}));
}

TEST(Vocabulary, CountsAndSpecials) {
  std::vector<std::vector<std::string>> corpus = {{"a", "b", "c"}, {"c", "d", "e", "a"}};
  auto v = tc::build_vocabulary(corpus);
  EXPECT_EQ(v.size(), 9u);
  EXPECT_EQ(v.token_at(0), "<pad>");
  EXPECT_EQ(v.token_at(3), "<eos>");
  EXPECT_EQ(v.index_of("zzz"), tc::Vocabulary::kUnk);
  // a and c occur twice; ties broken lexicographically
  EXPECT_EQ(v.token_at(4), "a");
  EXPECT_EQ(v.token_at(5), "c");
  EXPECT_EQ(v.token_at(6), "b");
  EXPECT_EQ(tc::kDefaultVocabularyCapacity, 10000u);
}

TEST(Vocabulary, CapacityTruncates) {
  std::vector<std::vector<std::string>> corpus = {{"x", "x", "x", "y", "y", "z"}};
  auto v = tc::build_vocabulary(corpus, 2);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_EQ(v.index_of("z"), tc::Vocabulary::kUnk);
  EXPECT_THROW(tc::build_vocabulary(corpus, 0), tonecraft::InvalidArgument);
  std::vector<std::vector<std::string>> empty;
  EXPECT_THROW(tc::build_vocabulary(empty), tonecraft::InvalidArgument);
}

TEST(Vocabulary, RoundTripsThroughFileAndEncoding) {
  std::mt19937 rng(23);
  std::vector<std::vector<std::string>> corpus(50);
  for (auto& doc : corpus)
    for (int k = 0; k < 12; ++k) doc.push_back("w" + std::to_string(std::uniform_int_distribution<int>(0, 80)(rng)));
  auto v = tc::build_vocabulary(corpus, 60);
  std::stringstream ss;
  v.write(ss);
  auto back = tc::Vocabulary::read(ss);
  EXPECT_EQ(back, v);
  for (const auto& doc : corpus) {
    std::vector<std::string> in_vocab;
    for (const auto& t : doc)
      if (v.contains(t)) in_vocab.push_back(t);
    EXPECT_EQ(v.decode(v.encode(in_vocab)), in_vocab);
  }
}

TEST(AssignTone, PrecedenceAndDefaults) {
  const std::set<std::string> emp = {"sorry", "apologize"}, pas = {"!", ":)", "so excited"};
  auto tone = [&](std::string text) { return tc::assign_tone(tc::tokenize(text), emp, pas); };
  EXPECT_EQ(tone("so sorry about that"), tc::Tone::empathetic);
  EXPECT_EQ(tone("we're on it!"), tc::Tone::passionate);
  EXPECT_EQ(tone("please dm us"), tc::Tone::neutral);
  EXPECT_EQ(tone("sorry! :)"), tc::Tone::empathetic);
  EXPECT_EQ(tone("we are so excited"), tc::Tone::passionate);
  EXPECT_EQ(tone("so very excited"), tc::Tone::neutral);
}

TEST(AssignTone, EmpatheticAlwaysWins) {
  std::mt19937 rng(29);
  const std::vector<std::string> words = {"sorry", "!", "great", "hi", ":)", "the", "apologize"};
  const std::set<std::string> emp = {"sorry", "apologize"}, pas = {"!", ":)"};
  for (int i = 0; i < 500; ++i) {
    std::vector<std::string> tokens;
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int k = 0; k < n; ++k) tokens.push_back(words[std::uniform_int_distribution<std::size_t>(0, 6)(rng)]);
    const bool has_emp = std::any_of(tokens.begin(), tokens.end(), [&](auto& t) { return emp.count(t) > 0; });
    if (has_emp) EXPECT_EQ(tc::assign_tone(tokens, emp, pas), tc::Tone::empathetic);
  }
}

TEST(MakePairs, SingleAndMultiRound) {
  tc::Conversation conv{{{Role::user, "my flight is late"},
                         {Role::agent, "sorry to hear that"},
                         {Role::user, "thanks"},
                         {Role::agent, "have a great trip!"}},
                        "u",
                        "a"};
  std::vector<std::vector<std::string>> corpus = {tc::conversation_tokens(conv)};
  auto vocab = tc::build_vocabulary(corpus);
  tc::ToneKeywords kw{{"sorry"}, {"!"}};
  auto pairs = tc::make_pairs(conv, vocab, kw);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(vocab.decode(pairs[0].context), (std::vector<std::string>{"my", "flight", "is", "late"}));
  EXPECT_EQ(vocab.decode(pairs[0].response), (std::vector<std::string>{"sorry", "to", "hear", "that", "<eos>"}));
  EXPECT_EQ(pairs[0].tone, tc::Tone::empathetic);
  EXPECT_EQ(vocab.decode(pairs[1].context),
            (std::vector<std::string>{"my", "flight", "is", "late", "<sep>", "sorry", "to", "hear", "that", "<sep>",
                                      "thanks"}));
  EXPECT_EQ(pairs[1].tone, tc::Tone::passionate);
  EXPECT_LT(pairs[0].context.size(), pairs[1].context.size());
}

TEST(MakePairs, OneRoundIsThePlainPair) {
  tc::Conversation conv{{{Role::user, "help"}, {Role::agent, "dm us"}}, "u", "a"};
  std::vector<std::vector<std::string>> corpus = {tc::conversation_tokens(conv)};
  auto vocab = tc::build_vocabulary(corpus);
  auto pairs = tc::make_pairs(conv, vocab, {});
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(vocab.decode(pairs[0].context), (std::vector<std::string>{"help"}));
  EXPECT_EQ(pairs[0].tone, tc::Tone::neutral);
}

TEST(MakePairs, ContextLengthsStrictlyIncrease) {
  std::mt19937 rng(31);
  tc::Vocabulary vocab = tc::Vocabulary::from_tokens(std::vector<std::string>{"a", "b", "<sep>"});
  for (int trial = 0; trial < 100; ++trial) {
    tc::Conversation conv{{}, "u", "a"};
    const int rounds = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int r = 0; r < 2 * rounds; ++r)
      conv.utterances.push_back(
          {r % 2 ? Role::agent : Role::user, std::string(std::uniform_int_distribution<int>(0, 3)(rng), 'a')});
    conv.utterances[0].text = "a";
    auto pairs = tc::make_pairs(conv, vocab, {});
    ASSERT_EQ(pairs.size(), static_cast<std::size_t>(rounds));
    for (std::size_t i = 1; i < pairs.size(); ++i) EXPECT_GT(pairs[i].context.size(), pairs[i - 1].context.size());
  }
}

TEST(CorpusIo, ArchiveLines) {
  std::istringstream in(
      R"({"id": 1, "reply_to": null, "author_role": "user", "author_id": "u1", "timestamp": 100, "text": "hi"})"
      "\n\n"
      R"({"id": "2", "reply_to": 1, "author_role": "agent", "author_id": "brand", "timestamp": 101, "text": "yo"})"
      "\n");
  auto messages = tc::read_archive(in);
  ASSERT_EQ(messages.size(), 2u);
  EXPECT_EQ(messages[1].reply_to, std::optional<std::string>("1"));
  std::istringstream bad(R"({"id": 1, "author_role": "bot", "author_id": "x", "timestamp": 1, "text": ""})");
  EXPECT_THROW(tc::read_archive(bad), tonecraft::ArchiveError);
}

TEST(CorpusIo, PairsRoundTrip) {
  std::vector<tc::TrainingPair> pairs = {{{4, 5}, {6, 3}, tc::Tone::passionate}, {{7}, {3}, tc::Tone::empathetic}};
  std::stringstream ss;
  tc::write_jsonl(ss, pairs);
  EXPECT_EQ(tc::read_pairs(ss), pairs);
}
