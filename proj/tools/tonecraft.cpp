// tonecraft: command-line driver for the whole pipeline.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. Data goes to
// stdout (or --out), diagnostics to stderr.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tonecraft/analytics.hpp"
#include "tonecraft/corpus.hpp"
#include "tonecraft/harness.hpp"
#include "tonecraft/neural.hpp"
#include "tonecraft/service.hpp"

#include <CLI11.hpp>

namespace {

using namespace tonecraft;
using nlohmann::json;

// A failure that should exit 1 with a message.
struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  if (std::filesystem::is_directory(path)) throw Failure(path + ": is a directory");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Failure(path + ": cannot open for reading");
  return is;
}

// Writes to `path`, or stdout for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Failure(path + ": cannot open for writing");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }
  void finish() {
    stream().flush();
    if (!stream()) throw Failure(path_ + ": write failed");
  }

 private:
  std::string path_;
  std::ofstream file_;
};

// Runs `fn`, naming `path` in any error it raises.
template <class F>
auto reading(const std::string& path, F&& fn) {
  auto is = open_in(path);
  try {
    return fn(is);
  } catch (const std::exception& e) {
    throw Failure(path + ": " + e.what());
  }
}

json read_json_file(const std::string& path) {
  return reading(path, [](std::istream& is) { return json::parse(is); });
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

corpus::Tone tone_arg(const std::string& name) {
  const auto t = corpus::parse_tone(name);
  if (!t) throw CLI::ValidationError("--tone", "expected empathetic, neutral or passionate, got '" + name + "'");
  return *t;
}

// Model and optimizer flags shared by train and eval. Preset values apply
// unless the flag was given explicitly.
struct ModelFlags {
  std::string preset = "full";
  std::size_t embedding_dim = 256, hidden_dim = 512, max_steps = 40, epochs = 10, batch_size = 64;
  double learning_rate = 0.001, clip_norm = 5.0;
  std::uint64_t seed = 0;
  CLI::Option *o_embedding = nullptr, *o_hidden = nullptr, *o_epochs = nullptr;

  void add(CLI::App* app) {
    app->add_option("--preset", preset, "full (paper scale) or desk (small, fast)")
        ->check(CLI::IsMember({"full", "desk"}))
        ->capture_default_str();
    o_embedding = app->add_option("--embedding-dim", embedding_dim, "word embedding size")->capture_default_str();
    o_hidden = app->add_option("--hidden-dim", hidden_dim, "LSTM hidden size")->capture_default_str();
    app->add_option("--max-steps", max_steps, "maximum decoding steps")->capture_default_str();
    o_epochs = app->add_option("--epochs", epochs, "training epochs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "mini-batch size")->capture_default_str();
    app->add_option("--lr", learning_rate, "Adam learning rate")->capture_default_str();
    app->add_option("--clip", clip_norm, "global gradient-norm clip (0 disables)")->capture_default_str();
    app->add_option("--seed", seed, "seed for initialization and shuffling")->capture_default_str();
  }

  void apply_preset() {
    if (preset != "desk") return;
    const auto desk = harness::desk_config();
    if (!o_embedding->count()) embedding_dim = desk.embedding_dim;
    if (!o_hidden->count()) hidden_dim = desk.hidden_dim;
    if (!o_epochs->count()) epochs = desk.train.epochs;
  }

  neural::TrainOptions train_options() const {
    neural::TrainOptions t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.learning_rate = learning_rate;
    t.clip_norm = clip_norm;
    t.seed = seed;
    return t;
  }
};

void log_epoch(std::size_t epoch, double loss) {
  std::cerr << "epoch " << (epoch + 1) << " loss " << loss << '\n';
}

// ---- subcommands ----

void cmd_ingest(const std::string& archive, const std::string& out) {
  const auto messages = reading(archive, [](std::istream& is) { return corpus::read_archive(is); });
  const auto chains = corpus::reconstruct_threads(messages);
  const auto convs = corpus::filter_conversations(chains);
  Output o(out);
  corpus::write_jsonl(o.stream(), convs);
  o.finish();
  std::cerr << messages.size() << " messages, " << chains.size() << " chains, " << convs.size()
            << " conversations\n";
}

void cmd_pairs(const std::string& conversations, const std::string& keywords_path, const std::string& vocab_in,
               const std::string& vocab_out, std::size_t capacity, const std::string& out) {
  const auto convs = reading(conversations, [](std::istream& is) { return corpus::read_conversations(is); });
  const auto keywords = corpus::keywords_from_json(read_json_file(keywords_path));
  corpus::Vocabulary vocab;
  if (!vocab_in.empty()) {
    vocab = reading(vocab_in, [](std::istream& is) { return corpus::Vocabulary::read(is); });
  } else {
    std::vector<std::vector<std::string>> counted;
    for (const auto& c : convs) counted.push_back(corpus::conversation_tokens(c));
    vocab = corpus::build_vocabulary(counted, capacity);
  }
  if (!vocab_out.empty()) {
    Output v(vocab_out);
    vocab.write(v.stream());
    v.finish();
  }
  std::vector<corpus::TrainingPair> pairs;
  for (const auto& c : convs)
    for (auto& p : corpus::make_pairs(c, vocab, keywords)) pairs.push_back(std::move(p));
  Output o(out);
  corpus::write_jsonl(o.stream(), pairs);
  o.finish();
  std::cerr << pairs.size() << " pairs, vocabulary " << vocab.size() << '\n';
}

std::vector<analytics::RatingRecord> load_ratings(const std::string& path) {
  return reading(path, [](std::istream& is) { return analytics::read_ratings(is); });
}

void cmd_regress(const std::string& ratings, const std::string& tones_arg, std::size_t family,
                 const std::string& format, const std::string& out) {
  const auto records = load_ratings(ratings);
  const auto matrix = analytics::mean_ratings(records, split_commas(tones_arg));
  const auto convs = analytics::rated_conversations(matrix);
  const std::size_t d = matrix.tones.size();
  std::vector<std::vector<analytics::ToneDeltaSample>> pooled(d);
  for (const auto& c : convs) {
    auto samples = analytics::tone_delta_samples(c);
    for (std::size_t j = 0; j < d; ++j) pooled[j].insert(pooled[j].end(), samples[j].begin(), samples[j].end());
  }
  analytics::OlsOptions opt;
  opt.names = matrix.tones;
  opt.bonferroni_m = family;
  std::vector<analytics::NamedRegression> results;
  for (std::size_t j = 0; j < d; ++j) {
    const auto [y, X] = analytics::regression_data(pooled[j]);
    results.push_back({matrix.tones[j], analytics::fit_ols(y, X, opt)});
  }
  Output o(out);
  if (format == "table")
    analytics::write_regression_table(o.stream(), results);
  else
    o.stream() << analytics::regression_report_json(results).dump(2) << '\n';
  o.finish();
}

void cmd_keywords(const std::string& responses_path, const std::string& ratings, const std::string& tone,
                  const analytics::KeywordOptions& options, bool all_terms, const std::string& format,
                  const std::string& out) {
  std::vector<std::pair<std::string, std::string>> responses;  // id, text
  reading(responses_path, [&](std::istream& is) {
    corpus::for_each_jsonl(is, [&](const json& j) {
      responses.emplace_back(corpus::detail::id_from_json(j.at("id")), j.at("text").get<std::string>());
    });
    return 0;
  });
  const auto matrix = analytics::mean_ratings(load_ratings(ratings), {tone});
  std::map<std::string, double> rating;
  for (std::size_t i = 0; i < matrix.items.size(); ++i) rating[matrix.items[i]] = matrix.values(static_cast<Eigen::Index>(i), 0);
  std::vector<analytics::RatedResponse> rated;
  for (const auto& [id, text] : responses) {
    const auto it = rating.find(id);
    if (it == rating.end()) throw Failure(ratings + ": no '" + tone + "' rating for response '" + id + "'");
    rated.push_back({corpus::tokenize(corpus::clean_text(text)), it->second});
  }
  const auto result = all_terms ? analytics::score_terms(rated, options) : analytics::extract_keywords(rated, options);
  Output o(out);
  if (format == "table")
    analytics::write_keyword_table(o.stream(), tone, result);
  else
    o.stream() << analytics::keyword_report_json(tone, result).dump(2) << '\n';
  o.finish();
}

void cmd_pca(const std::string& ratings, const std::string& tones_arg, long components, const std::string& out) {
  const auto matrix = analytics::mean_ratings(load_ratings(ratings), split_commas(tones_arg));
  const long d = static_cast<long>(matrix.tones.size());
  const auto result = analytics::pca(matrix.values, components > 0 ? components : std::min(8L, d));
  Output o(out);
  o.stream() << analytics::to_json(result, matrix.tones).dump(2) << '\n';
  o.finish();
}

harness::SyntheticSpec load_spec(const std::string& path) {
  if (path.empty()) return harness::default_spec();
  try {
    return harness::spec_from_json(read_json_file(path));
  } catch (const InvalidArgument& e) {
    throw Failure(path + ": " + e.what());
  }
}

void cmd_synth(const std::string& spec_path, std::size_t n, std::optional<std::uint64_t> seed,
               const std::string& format, const std::string& keywords_out, bool print_spec, const std::string& out) {
  auto spec = load_spec(spec_path);
  if (seed) spec.seed = *seed;
  Output o(out);
  if (print_spec) {
    o.stream() << harness::to_json(spec).dump(2) << '\n';
    o.finish();
    return;
  }
  const auto convs = harness::synth_corpus(spec, n);
  if (format == "conversations")
    corpus::write_jsonl(o.stream(), convs);
  else
    corpus::write_jsonl(o.stream(), harness::to_raw_messages(convs));
  o.finish();
  if (!keywords_out.empty()) {
    Output k(keywords_out);
    k.stream() << corpus::to_json(harness::marker_keywords(spec)).dump() << '\n';
    k.finish();
  }
}

void cmd_train(const std::string& pairs_path, const std::string& vocab_path, const std::string& out,
               ModelFlags flags) {
  flags.apply_preset();
  const auto pairs = reading(pairs_path, [](std::istream& is) { return corpus::read_pairs(is); });
  const auto vocab = reading(vocab_path, [](std::istream& is) { return corpus::Vocabulary::read(is); });
  const neural::ModelConfig config{vocab.size(), flags.embedding_dim, flags.hidden_dim, flags.max_steps};
  config.validate();
  std::cerr << pairs.size() << " pairs, V=" << config.vocab_size << " d_e=" << config.embedding_dim
            << " d_h=" << config.hidden_dim << '\n';
  const auto result =
      neural::train(pairs, neural::init_params(config, flags.seed), flags.train_options(), log_epoch);
  neural::save_checkpoint(out, config, vocab, result.params);
  std::cerr << "checkpoint " << neural::checkpoint_id(config, vocab, result.params) << " written to " << out << '\n';
}

void cmd_generate(const std::string& model_path, const std::string& tone, const std::vector<std::string>& turns,
                  std::size_t max_steps) {
  const auto t = tone_arg(tone);
  if (turns.size() % 2 == 0)
    throw CLI::ValidationError("--text", "give an odd number of turns: user, agent, ..., user");
  const auto model = neural::load_checkpoint(model_path);
  std::vector<corpus::Utterance> conv;
  for (std::size_t i = 0; i < turns.size(); ++i)
    conv.push_back({i % 2 == 0 ? corpus::Role::user : corpus::Role::agent, turns[i]});
  const auto ids = service::context_ids(conv, model.vocabulary);
  if (ids.empty()) throw Failure("the request has no tokens after cleaning");
  const auto g = neural::generate(model.params, ids, t, max_steps > 0 ? max_steps : model.config.max_decode_steps);
  std::cout << service::detokenize(model.vocabulary, g.tokens) << '\n';
}

void cmd_eval(const std::string& spec_path, std::size_t conversations, std::size_t held_out, std::size_t capacity,
              ModelFlags flags, const std::string& checkpoint_out, const std::string& out) {
  flags.apply_preset();
  const auto spec = load_spec(spec_path);
  harness::ExperimentConfig c;
  c.conversations = conversations;
  c.held_out = held_out;
  c.vocab_capacity = capacity > 0 ? capacity : (flags.preset == "desk" ? harness::desk_config().vocab_capacity
                                                                       : corpus::kDefaultVocabularyCapacity);
  c.embedding_dim = flags.embedding_dim;
  c.hidden_dim = flags.hidden_dim;
  c.max_decode_steps = flags.max_steps;
  c.train = flags.train_options();
  c.init_seed = flags.seed;
  const auto run = harness::run_experiment(spec, c, log_epoch);
  if (!checkpoint_out.empty()) neural::save_checkpoint(checkpoint_out, run.report.model, run.vocabulary, run.params);
  Output o(out);
  o.stream() << harness::to_json(run.report).dump(2) << '\n';
  o.finish();
}

void cmd_serve(const std::string& model_path, const std::string& host, int port) {
  std::shared_ptr<const neural::LoadedModel> model;
  if (!model_path.empty()) {
    model = std::make_shared<const neural::LoadedModel>(neural::load_checkpoint(model_path));
    std::cerr << "loaded checkpoint " << model->id << '\n';
  }
  service::Server server(model);
  std::cerr << "listening on " << host << ':' << port << '\n';
  if (!server.listen(host, port)) throw Failure("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tonecraft: tone-conditioned customer-care response engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tonecraft 1.0");

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "random seed (unused by deterministic commands)"); };
  std::string out = "-";
  auto add_out = [&](CLI::App* sub) { sub->add_option("-o,--out", out, "output path, - for stdout")->capture_default_str(); };

  // ingest
  std::string archive;
  auto* ingest = app.add_subcommand("ingest", "raw message archive (JSONL) -> filtered, cleaned conversations (JSONL)");
  ingest->add_option("--archive", archive, "raw message archive")->required();
  add_out(ingest);
  add_seed(ingest);

  // pairs
  std::string conversations, keywords, vocab_in, vocab_out;
  std::size_t capacity = corpus::kDefaultVocabularyCapacity;
  auto* pairs = app.add_subcommand("pairs", "conversations + tone keywords -> training pairs (JSONL)");
  pairs->add_option("--conversations", conversations, "conversations JSONL")->required();
  pairs->add_option("--keywords", keywords, "JSON {\"empathetic\": [...], \"passionate\": [...]}")->required();
  auto* vin = pairs->add_option("--vocab", vocab_in, "use this vocabulary instead of building one");
  pairs->add_option("--vocab-out", vocab_out, "write the vocabulary here")->excludes(vin);
  pairs->add_option("--capacity", capacity, "vocabulary size excluding special tokens")->capture_default_str();
  add_out(pairs);
  add_seed(pairs);

  // regress
  std::string ratings, tones, format = "json";
  std::size_t family = 0;
  auto* regress = app.add_subcommand("regress", "utterance tone ratings -> tone-delta regressions");
  regress->add_option("--ratings", ratings, "rating records JSONL (item ids '<conversation>/<turn>')")->required();
  regress->add_option("--tones", tones, "comma-separated tone criteria to use, in order (default: all)");
  regress->add_option("--family", family, "Bonferroni family size (default: number of regressors)");
  regress->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
  add_out(regress);
  add_seed(regress);

  // keywords
  std::string responses, tone = "empathetic";
  analytics::KeywordOptions kopt;
  bool all_terms = false;
  auto* kw = app.add_subcommand("keywords", "agent responses + tone ratings -> significant keywords");
  kw->add_option("--responses", responses, "JSONL with {id, text}")->required();
  kw->add_option("--ratings", ratings, "rating records JSONL keyed by response id")->required();
  kw->add_option("--tone", tone, "criterion to split on")->capture_default_str();
  kw->add_option("--threshold", kopt.rating_threshold, "toned when mean rating >= threshold")->capture_default_str();
  kw->add_option("--alpha", kopt.alpha, "significance level after Bonferroni")->capture_default_str();
  kw->add_option("--min-count", kopt.min_count, "terms must occur more often than this")->capture_default_str();
  kw->add_option("--max-order", kopt.max_order, "longest n-gram")->capture_default_str();
  kw->add_flag("--all-terms", all_terms, "report every candidate, not only keywords");
  kw->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
  add_out(kw);
  add_seed(kw);

  // pca
  long components = 0;
  auto* pca = app.add_subcommand("pca", "tone ratings -> principal components of the tone correlation matrix");
  pca->add_option("--ratings", ratings, "rating records JSONL")->required();
  pca->add_option("--tones", tones, "comma-separated criteria (default: all)");
  pca->add_option("-k,--components", components, "number of components (default: min(8, tones))");
  add_out(pca);
  add_seed(pca);

  // synth
  std::string spec_path, synth_format = "archive", keywords_out;
  std::size_t n = 1000;
  std::optional<std::uint64_t> synth_seed;
  bool print_spec = false;
  auto* synth = app.add_subcommand("synth", "synthetic customer-care corpus");
  synth->add_option("--spec", spec_path, "synthetic spec JSON (default: built-in)");
  synth->add_option("-n,--conversations", n, "number of conversations")->capture_default_str();
  synth->add_option("--format", synth_format, "archive (raw messages) or conversations")
      ->check(CLI::IsMember({"archive", "conversations"}))
      ->capture_default_str();
  synth->add_option("--keywords-out", keywords_out, "write the spec's markers as a keywords file");
  synth->add_flag("--print-spec", print_spec, "print the spec JSON instead of a corpus");
  synth->add_option("--seed", synth_seed, "override the spec's seed");
  add_out(synth);

  // train
  std::string pairs_path, vocab_path, model_out;
  ModelFlags train_flags;
  auto* train = app.add_subcommand("train", "training pairs + vocabulary -> checkpoint");
  train->add_option("--pairs", pairs_path, "training pairs JSONL")->required();
  train->add_option("--vocab", vocab_path, "vocabulary file")->required();
  train->add_option("--out", model_out, "checkpoint path")->required();
  train_flags.add(train);

  // generate
  std::string model_path;
  std::vector<std::string> turns;
  std::size_t gen_steps = 0;
  auto* gen = app.add_subcommand("generate", "one greedy response in the requested tone");
  gen->add_option("--model", model_path, "checkpoint path")->required();
  gen->add_option("--tone", tone, "empathetic, neutral or passionate")->required();
  gen->add_option("--text", turns, "conversation turns, user first; repeat for earlier rounds")->required();
  gen->add_option("--max-steps", gen_steps, "decoding limit (default: from the checkpoint)");
  add_seed(gen);

  // eval
  std::size_t eval_convs = 3000, held_out = 200, eval_capacity = 0;
  std::string ckpt_out;
  ModelFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "synthesize, train and measure tone emission rates");
  eval->add_option("--spec", spec_path, "synthetic spec JSON (default: built-in)");
  eval->add_option("--conversations", eval_convs, "training conversations")->capture_default_str();
  eval->add_option("--held-out", held_out, "held-out requests")->capture_default_str();
  eval->add_option("--capacity", eval_capacity, "vocabulary capacity (default: preset)");
  eval->add_option("--checkpoint", ckpt_out, "also save the trained model here");
  eval_flags.add(eval);
  add_out(eval);

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP API over a checkpoint");
  serve->add_option("--model", model_path, "checkpoint path (omit to serve health only)");
  serve->add_option("--host", host, "listen address")->capture_default_str();
  serve->add_option("--port", port, "listen port")->capture_default_str();
  add_seed(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // help and version exit 0; every other parse problem is a usage error
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*ingest) cmd_ingest(archive, out);
    else if (*pairs) cmd_pairs(conversations, keywords, vocab_in, vocab_out, capacity, out);
    else if (*regress) cmd_regress(ratings, tones, family, format, out);
    else if (*kw) cmd_keywords(responses, ratings, tone, kopt, all_terms, format, out);
    else if (*pca) cmd_pca(ratings, tones, components, out);
    else if (*synth) cmd_synth(spec_path, n, synth_seed, synth_format, keywords_out, print_spec, out);
    else if (*train) cmd_train(pairs_path, vocab_path, model_out, train_flags);
    else if (*gen) cmd_generate(model_path, tone, turns, gen_steps);
    else if (*eval) cmd_eval(spec_path, eval_convs, held_out, eval_capacity, eval_flags, ckpt_out, out);
    else if (*serve) cmd_serve(model_path, host, port);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "tonecraft: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tonecraft: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
