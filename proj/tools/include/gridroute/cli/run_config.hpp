#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "gridroute/dqn_trainer.hpp"

namespace gridroute::cli {

enum class RenderMode { Frames, Summary };

/// Everything a command may need, loaded from one JSON document:
///
///   {
///     "trainer":   { ...flat TrainerConfig keys, environment included... },
///     "out_dir":   "runs/default",
///     "eval_seed": 7,
///     "eval_instances": 50,
///     "finetune_episodes": 0,
///     "render_mode": "summary"
///   }
///
/// Every key is optional; unknown keys are rejected.
struct RunConfig {
  TrainerConfig trainer{};
  std::string out_dir = "out";
  std::uint64_t eval_seed = 7;
  int eval_instances = 50;
  int finetune_episodes = 0;
  RenderMode render_mode = RenderMode::Summary;
};

RenderMode parse_render_mode(const std::string& text);
std::string to_string(RenderMode mode);

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

}  // namespace gridroute::cli
