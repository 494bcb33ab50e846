#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridroute/problem.hpp"

namespace gridroute {

struct GeneratorConfig {
  int rows = defaults::kRows;
  int cols = defaults::kCols;
  std::vector<Cell> walls = defaults::kWalls;
  Cell depot = defaults::kDepot;
  int num_landmarks = defaults::kNumLandmarks;
  int num_agents = defaults::kNumAgents;
  std::uint64_t seed = 0;
};

/// Landmarks drawn uniformly without replacement from the free cells other
/// than the depot; a pure function of the config.
ProblemInstance generate(const GeneratorConfig& config);

/// Training and evaluation seeds live in disjoint halves of the 64-bit
/// space (top bit clear vs set).
std::uint64_t training_instance_seed(std::uint64_t master_seed, int problem_index);
std::uint64_t evaluation_instance_seed(std::uint64_t eval_seed, int instance_index);

nlohmann::json instance_to_json(const ProblemInstance& instance);
/// Validates every instance invariant; throws ValidationError.
ProblemInstance instance_from_json(const nlohmann::json& doc);

std::string serialize_instance(const ProblemInstance& instance);
ProblemInstance parse_instance(std::string_view text);

}  // namespace gridroute
