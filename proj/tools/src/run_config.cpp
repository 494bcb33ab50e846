#include "gridroute/cli/run_config.hpp"

#include <fstream>
#include <sstream>

#include "gridroute/error.hpp"

namespace gridroute::cli {

RenderMode parse_render_mode(const std::string& text) {
  if (text == "frames") return RenderMode::Frames;
  if (text == "summary") return RenderMode::Summary;
  throw ValidationError("unknown render mode '" + text + "' (expected frames or summary)");
}

std::string to_string(RenderMode mode) { return mode == RenderMode::Frames ? "frames" : "summary"; }

nlohmann::json run_config_to_json(const RunConfig& c) {
  return {{"trainer", trainer_config_to_json(c.trainer)},
          {"out_dir", c.out_dir},
          {"eval_seed", c.eval_seed},
          {"eval_instances", c.eval_instances},
          {"finetune_episodes", c.finetune_episodes},
          {"render_mode", to_string(c.render_mode)}};
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("run config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "trainer") c.trainer = trainer_config_from_json(v);
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "eval_seed") c.eval_seed = v.get<std::uint64_t>();
      else if (key == "eval_instances") c.eval_instances = v.get<int>();
      else if (key == "finetune_episodes") c.finetune_episodes = v.get<int>();
      else if (key == "render_mode") c.render_mode = parse_render_mode(v.get<std::string>());
      else throw ValidationError("unknown run config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run config: ") + e.what());
  }
  if (c.eval_instances <= 0) throw ValidationError("eval_instances must be positive");
  if (c.finetune_episodes < 0) throw ValidationError("finetune_episodes must be non-negative");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(doc);
}

}  // namespace gridroute::cli
