#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "gridroute/checkpoint.hpp"
#include "gridroute/error.hpp"
#include "gridroute/rng.hpp"

namespace gridroute {
namespace {

Checkpoint sample_checkpoint(const std::vector<int>& sizes = {13, 16, 16, 12}) {
  Checkpoint ck;
  ck.net = init_network(31, sizes);
  Rng rng(2);
  for (auto& layer : ck.net.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.normal() * 1e-3;
  }
  ck.metadata.seed = 31;
  ck.metadata.rng_algorithm = Rng::kAlgorithm;
  ck.metadata.config_hash = sha256_hex("config");
  ck.metadata.extra = {{"train_steps", 17}};
  return ck;
}

std::string expect_rejected(const std::string& doc, const std::optional<std::vector<int>>& sizes = std::nullopt) {
  try {
    load_checkpoint(doc, sizes);
  } catch (const ValidationError& e) {
    return e.what();
  }
  ADD_FAILURE() << "checkpoint accepted";
  return {};
}

TEST(Checkpoint, RoundtripIsBitExact) {
  const Checkpoint ck = sample_checkpoint();
  const std::string doc = save_checkpoint(ck);
  const Checkpoint back = load_checkpoint(doc);
  EXPECT_EQ(back.net, ck.net);
  EXPECT_EQ(back.metadata, ck.metadata);
  EXPECT_FALSE(back.adam.has_value());
  EXPECT_EQ(save_checkpoint(back), doc);

  Rng rng(9);
  for (int s = 0; s < 100; ++s) {
    Eigen::VectorXd x(13);
    for (int i = 0; i < 13; ++i) x[i] = rng.uniform01();
    const Eigen::VectorXd a = forward(ck.net, x), b = forward(back.net, x);
    for (int i = 0; i < 12; ++i) ASSERT_EQ(a[i], b[i]);
  }
}

TEST(Checkpoint, AdamStateRoundtrip) {
  Checkpoint ck = sample_checkpoint({3, 4, 2});
  AdamState adam = AdamState::for_network(ck.net);
  Gradients g = zero_gradients(ck.net);
  g[0].weights.setConstant(0.3);
  g[1].bias.setConstant(-2.0);
  adam_step(ck.net, g, adam);
  adam_step(ck.net, g, adam);
  ck.adam = adam;
  const Checkpoint back = load_checkpoint(save_checkpoint(ck));
  ASSERT_TRUE(back.adam.has_value());
  EXPECT_EQ(back.adam->step, 2);
  EXPECT_EQ(back.adam->first_moment, adam.first_moment);
  EXPECT_EQ(back.adam->second_moment, adam.second_moment);
  EXPECT_EQ(back.adam->config.learning_rate, adam.config.learning_rate);
}

TEST(Checkpoint, TruncatedDocument) {
  const std::string doc = save_checkpoint(sample_checkpoint());
  EXPECT_NE(expect_rejected(doc.substr(0, doc.size() / 2)).find("corrupted payload"), std::string::npos);
}

TEST(Checkpoint, DamagedParameterBlock) {
  auto doc = nlohmann::json::parse(save_checkpoint(sample_checkpoint()));
  std::string block = doc["parameters"][0].get<std::string>();
  block.resize(block.size() - 8);
  doc["parameters"][0] = block;
  EXPECT_NE(expect_rejected(doc.dump()).find("corrupted payload"), std::string::npos);
  doc["parameters"][0] = "!!!not base64!!!";
  EXPECT_NE(expect_rejected(doc.dump()).find("corrupted payload"), std::string::npos);
}

TEST(Checkpoint, ShapeMismatch) {
  const std::string doc = save_checkpoint(sample_checkpoint());
  EXPECT_NE(expect_rejected(doc, std::vector<int>{13, 512, 512, 12}).find("shape mismatch"), std::string::npos);
  EXPECT_NO_THROW(load_checkpoint(doc, std::vector<int>{13, 16, 16, 12}));
}

TEST(Checkpoint, VersionMismatch) {
  auto doc = nlohmann::json::parse(save_checkpoint(sample_checkpoint()));
  doc["format_version"] = kCheckpointFormatVersion + 1;
  EXPECT_NE(expect_rejected(doc.dump()).find("version mismatch"), std::string::npos);
}

TEST(Checkpoint, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace gridroute
