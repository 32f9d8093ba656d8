#ifndef TONECRAFT_NEURAL_CHECKPOINT_HPP
#define TONECRAFT_NEURAL_CHECKPOINT_HPP

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonecraft/corpus/vocabulary.hpp"
#include "tonecraft/error.hpp"
#include "tonecraft/neural/params.hpp"

namespace tonecraft::neural {

// Layout: version byte, u64 manifest length, JSON manifest, then every array
// as row-major little-endian float64 in manifest order.
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct LoadedModel {
  ModelConfig config;
  corpus::Vocabulary vocabulary;
  Parameters params;
  std::string id;  // content hash of the checkpoint bytes
};

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

}  // namespace detail

inline std::string serialize_checkpoint(const ModelConfig& config, const corpus::Vocabulary& vocab,
                                        const Parameters& params) {
  config.validate();
  if (vocab.size() != config.vocab_size || params.vocab_size() != config.vocab_size ||
      params.embedding_dim() != config.embedding_dim || params.hidden_dim() != config.hidden_dim)
    throw InvalidArgument("checkpoint config, vocabulary and parameters disagree on shape");
  if (!same_shapes(params, zero_params(config))) throw InvalidArgument("parameter shapes do not match the config");
  nlohmann::json manifest;
  manifest["config"] = {{"vocab_size", config.vocab_size},
                        {"embedding_dim", config.embedding_dim},
                        {"hidden_dim", config.hidden_dim},
                        {"max_decode_steps", config.max_decode_steps}};
  const auto regular = vocab.regular_tokens();
  manifest["vocabulary"] = std::vector<std::string>(regular.begin(), regular.end());
  manifest["arrays"] = nlohmann::json::array();
  Parameters::for_each(params, [&](const char* name, const Matrix& m) {
    manifest["arrays"].push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  });
  const std::string text = manifest.dump();
  std::string out;
  out.push_back(static_cast<char>(kCheckpointVersion));
  detail::put_u64(out, text.size());
  out += text;
  Parameters::for_each(params, [&](const char*, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) detail::put_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  });
  return out;
}

inline LoadedModel deserialize_checkpoint(std::string_view bytes) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 9) throw ArchiveError("checkpoint truncated before the manifest");
  if (data[0] != kCheckpointVersion)
    throw ArchiveError("unsupported checkpoint version " + std::to_string(static_cast<int>(data[0])));
  const std::uint64_t len = detail::get_u64(data + 1);
  if (len > bytes.size() - 9) throw ArchiveError("checkpoint manifest length exceeds file size");
  LoadedModel model;
  std::size_t offset = 9 + static_cast<std::size_t>(len);
  try {
    const auto manifest = nlohmann::json::parse(bytes.substr(9, static_cast<std::size_t>(len)));
    const auto& c = manifest.at("config");
    model.config.vocab_size = c.at("vocab_size").get<std::size_t>();
    model.config.embedding_dim = c.at("embedding_dim").get<std::size_t>();
    model.config.hidden_dim = c.at("hidden_dim").get<std::size_t>();
    model.config.max_decode_steps = c.at("max_decode_steps").get<std::size_t>();
    model.config.validate();
    const auto tokens = manifest.at("vocabulary").get<std::vector<std::string>>();
    model.vocabulary = corpus::Vocabulary::from_tokens(tokens);
    if (model.vocabulary.size() != model.config.vocab_size)
      throw ArchiveError("checkpoint vocabulary size does not match its config");
    model.params = zero_params(model.config);
    const auto& arrays = manifest.at("arrays");
    std::size_t k = 0;
    Parameters::for_each(model.params, [&](const char* name, Matrix& m) {
      if (k >= arrays.size()) throw ArchiveError("checkpoint manifest is missing array " + std::string(name));
      const auto& a = arrays[k++];
      if (a.at("name").get<std::string>() != name || a.at("rows").get<Eigen::Index>() != m.rows() ||
          a.at("cols").get<Eigen::Index>() != m.cols())
        throw ArchiveError("checkpoint array " + std::string(name) + " has an unexpected name or shape");
      const std::size_t need = static_cast<std::size_t>(m.size()) * 8;
      if (bytes.size() - offset < need) throw ArchiveError("checkpoint truncated in array " + std::string(name));
      for (Eigen::Index i = 0; i < m.size(); ++i, offset += 8)
        m.data()[i] = std::bit_cast<double>(detail::get_u64(data + offset));
    });
    if (k != arrays.size()) throw ArchiveError("checkpoint manifest lists unexpected arrays");
  } catch (const nlohmann::json::exception& e) {
    throw ArchiveError(std::string("malformed checkpoint manifest: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ArchiveError(std::string("invalid checkpoint: ") + e.what());
  }
  if (offset != bytes.size()) throw ArchiveError("checkpoint has trailing bytes");
  if (!all_finite(model.params)) throw ArchiveError("checkpoint contains non-finite values");
  model.id = detail::fnv1a_hex(bytes);
  return model;
}

inline std::string checkpoint_id(const ModelConfig& config, const corpus::Vocabulary& vocab, const Parameters& params) {
  return detail::fnv1a_hex(serialize_checkpoint(config, vocab, params));
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                            const corpus::Vocabulary& vocab, const Parameters& params) {
  const std::string bytes = serialize_checkpoint(config, vocab, params);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("failed writing " + path.string());
}

inline LoadedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const ArchiveError& e) {
    throw ArchiveError(path.string() + ": " + e.what());
  }
}

}  // namespace tonecraft::neural

#endif  // TONECRAFT_NEURAL_CHECKPOINT_HPP
