#include "gridroute/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "gridroute/error.hpp"

namespace gridroute {

namespace {

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) throw ValidationError("corrupted payload: bad base64 length");
  std::vector<unsigned char> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ValidationError("corrupted payload: invalid base64");
  std::size_t padding = 0;
  if (text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

void put_double(std::vector<unsigned char>& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

double get_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

nlohmann::json encode_blocks(const std::vector<DenseLayer>& layers) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& l : layers) {
    std::vector<unsigned char> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()) * 8);
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) put_double(w, l.weights(r, c));
    }
    std::vector<unsigned char> b;
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_double(b, l.bias[r]);
    blocks.push_back(base64_encode(w));
    blocks.push_back(base64_encode(b));
  }
  return blocks;
}

void decode_blocks(const nlohmann::json& blocks, std::vector<DenseLayer>& layers) {
  if (!blocks.is_array() || blocks.size() != 2 * layers.size()) {
    throw ValidationError("corrupted payload: wrong number of parameter blocks");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    auto& l = layers[i];
    const auto w = base64_decode(blocks[2 * i].get<std::string>());
    const auto b = base64_decode(blocks[2 * i + 1].get<std::string>());
    if (w.size() != static_cast<std::size_t>(l.weights.size()) * 8 ||
        b.size() != static_cast<std::size_t>(l.bias.size()) * 8) {
      throw ValidationError("corrupted payload: parameter block size mismatch");
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c, k += 8) l.weights(r, c) = get_double(&w[k]);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = get_double(&b[8 * static_cast<std::size_t>(r)]);
  }
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string save_checkpoint(const Checkpoint& checkpoint) {
  const auto& sizes = checkpoint.net.layer_sizes();
  nlohmann::json shapes = nlohmann::json::array();
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) shapes.push_back({sizes[i + 1], sizes[i]});

  nlohmann::json doc{
      {"format_version", kCheckpointFormatVersion},
      {"metadata",
       {{"seed", checkpoint.metadata.seed},
        {"rng_algorithm", checkpoint.metadata.rng_algorithm},
        {"config_hash", checkpoint.metadata.config_hash},
        {"extra", checkpoint.metadata.extra}}},
      {"layer_sizes", sizes},
      {"shapes", shapes},
      {"parameters", encode_blocks(checkpoint.net.layers())},
  };
  if (checkpoint.adam) {
    const AdamState& a = *checkpoint.adam;
    doc["adam"] = {{"step", a.step},
                   {"learning_rate", a.config.learning_rate},
                   {"beta1", a.config.beta1},
                   {"beta2", a.config.beta2},
                   {"epsilon", a.config.epsilon},
                   {"first_moment", encode_blocks(a.first_moment)},
                   {"second_moment", encode_blocks(a.second_moment)}};
  }
  return doc.dump(1) + "\n";
}

Checkpoint load_checkpoint(std::string_view document, const std::optional<std::vector<int>>& expected_sizes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error&) {
    throw ValidationError("corrupted payload: checkpoint is not valid JSON");
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ValidationError("version mismatch: checkpoint format " + std::to_string(version) + ", expected " +
                            std::to_string(kCheckpointFormatVersion));
    }
    const auto sizes = doc.at("layer_sizes").get<std::vector<int>>();
    if (expected_sizes && sizes != *expected_sizes) throw ValidationError("shape mismatch: checkpoint layer sizes differ");

    Checkpoint cp;
    cp.net = QNetwork(sizes);
    decode_blocks(doc.at("parameters"), cp.net.layers());
    if (!cp.net.all_finite()) throw ValidationError("corrupted payload: non-finite parameters");

    const auto& meta = doc.at("metadata");
    cp.metadata.seed = meta.at("seed").get<std::uint64_t>();
    cp.metadata.rng_algorithm = meta.at("rng_algorithm").get<std::string>();
    cp.metadata.config_hash = meta.at("config_hash").get<std::string>();
    cp.metadata.extra = meta.value("extra", nlohmann::json::object());

    if (doc.contains("adam")) {
      const auto& ja = doc.at("adam");
      AdamConfig hp{ja.at("learning_rate").get<double>(), ja.at("beta1").get<double>(), ja.at("beta2").get<double>(),
                    ja.at("epsilon").get<double>()};
      AdamState adam = AdamState::for_network(cp.net, hp);
      adam.step = ja.at("step").get<std::int64_t>();
      decode_blocks(ja.at("first_moment"), adam.first_moment);
      decode_blocks(ja.at("second_moment"), adam.second_moment);
      cp.adam = std::move(adam);
    }
    return cp;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("corrupted payload: ") + e.what());
  }
}

void write_checkpoint_file(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  out << save_checkpoint(checkpoint);
}

Checkpoint read_checkpoint_file(const std::string& path, const std::optional<std::vector<int>>& expected_sizes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_checkpoint(buf.str(), expected_sizes);
}

}  // namespace gridroute
