#include <gtest/gtest.h>

#include <map>
#include <set>

#include "gridroute/error.hpp"
#include "gridroute/grid_env.hpp"
#include "gridroute/problem_gen.hpp"

namespace gridroute {
namespace {

GeneratorConfig with_seed(std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  return c;
}

TEST(Generate, DeterministicPerSeed) {
  EXPECT_EQ(generate(with_seed(7)), generate(with_seed(7)));
  EXPECT_NE(generate(with_seed(7)).landmarks, generate(with_seed(8)).landmarks);
}

TEST(Generate, DrawsAreAlwaysValid) {
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const ProblemInstance p = generate(with_seed(s));
    ASSERT_EQ(p.landmarks.size(), 5u);
    std::set<Cell> distinct(p.landmarks.begin(), p.landmarks.end());
    ASSERT_EQ(distinct.size(), 5u);
    for (Cell c : p.landmarks) {
      ASSERT_TRUE(p.in_range(c));
      ASSERT_FALSE(p.is_wall(c));
      ASSERT_NE(c, p.depot);
    }
    ASSERT_NO_THROW(validate_instance(p));
  }
}

// 42 eligible cells, 5 draws each: every cell should appear with frequency
// near 5/42 per instance.
TEST(Generate, CellFrequenciesUniform) {
  const int n = 50000;
  std::map<Cell, int> hits;
  for (int s = 0; s < n; ++s) {
    for (Cell c : generate(with_seed(training_instance_seed(1, s))).landmarks) ++hits[c];
  }
  ASSERT_EQ(hits.size(), 42u);
  const double expected = n * 5.0 / 42.0;
  for (auto [cell, count] : hits) {
    EXPECT_NEAR(count, expected, 0.15 * expected) << "cell " << cell;
  }
}

TEST(Generate, NotEnoughCells) {
  GeneratorConfig c;
  c.num_landmarks = 43;
  EXPECT_THROW(generate(c), ValidationError);
}

TEST(Seeds, PartitionsAreDisjoint) {
  std::set<std::uint64_t> train;
  for (int i = 0; i < 1000; ++i) {
    const auto s = training_instance_seed(42, i);
    EXPECT_EQ(s >> 63, 0u);
    train.insert(s);
  }
  EXPECT_EQ(train.size(), 1000u);
  for (int i = 0; i < 1000; ++i) {
    const auto s = evaluation_instance_seed(42, i);
    EXPECT_EQ(s >> 63, 1u);
    EXPECT_FALSE(train.count(s));
  }
}

TEST(InstanceJson, Roundtrip) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    ProblemInstance p = generate(with_seed(s));
    if (s % 2) p.name = "p" + std::to_string(s);
    const std::string text = serialize_instance(p);
    EXPECT_EQ(parse_instance(text), p);
    EXPECT_EQ(serialize_instance(parse_instance(text)), text);
  }
}

TEST(InstanceJson, OutOfRangeLandmark) {
  auto doc = instance_to_json(generate(with_seed(3)));
  doc["landmarks"][0] = 49;
  try {
    instance_from_json(doc);
    FAIL() << "accepted landmark 49";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("cell out of range"), std::string::npos) << e.what();
  }
}

TEST(InstanceJson, LandmarkOnWall) {
  auto doc = instance_to_json(generate(with_seed(3)));
  doc["landmarks"][0] = 8;
  EXPECT_THROW(instance_from_json(doc), ValidationError);
}

TEST(InstanceJson, Malformed) {
  EXPECT_THROW(parse_instance("{"), ValidationError);
  EXPECT_THROW(parse_instance("[]"), ValidationError);
  auto doc = instance_to_json(generate(with_seed(3)));
  doc.erase("depot");
  EXPECT_THROW(instance_from_json(doc), ValidationError);
}

}  // namespace
}  // namespace gridroute
