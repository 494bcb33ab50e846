#include "gridroute/trace.hpp"

#include "gridroute/error.hpp"
#include "gridroute/problem_gen.hpp"

namespace gridroute {

std::string_view to_string(Termination t) {
  return t == Termination::AllVisited ? "all-visited" : "step-limit";
}

namespace {

Termination termination_from_string(const std::string& s) {
  if (s == "all-visited") return Termination::AllVisited;
  if (s == "step-limit") return Termination::StepLimit;
  throw ValidationError("unknown termination cause: " + s);
}

std::vector<int> moves_to_ints(const JointAction& a) {
  std::vector<int> out;
  for (Move m : a) out.push_back(move_index(m));
  return out;
}

}  // namespace

nlohmann::json trace_to_json(const EpisodeTrace& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepRecord& s : trace.steps) {
    std::vector<int> flags(s.visited.begin(), s.visited.end());
    steps.push_back({{"action", moves_to_ints(s.action)},
                     {"agent_cells", s.agent_cells},
                     {"reward", s.reward},
                     {"visited", flags}});
  }
  return nlohmann::json{{"instance", instance_to_json(trace.instance)},
                        {"instance_id", trace.instance_id},
                        {"policy", trace.policy},
                        {"steps", steps},
                        {"termination", std::string(to_string(trace.termination))},
                        {"tails", trace.tails},
                        {"total_distance", trace.total_distance},
                        {"success", trace.success}};
}

EpisodeTrace trace_from_json(const nlohmann::json& doc) {
  EpisodeTrace trace;
  try {
    trace.instance = instance_from_json(doc.at("instance"));
    trace.instance_id = doc.at("instance_id").get<std::string>();
    trace.policy = doc.at("policy").get<std::string>();
    const auto agents = static_cast<std::size_t>(trace.instance.num_agents);
    const auto landmarks = trace.instance.landmarks.size();
    for (const auto& js : doc.at("steps")) {
      StepRecord s;
      for (int m : js.at("action").get<std::vector<int>>()) s.action.push_back(move_from_index(m));
      s.agent_cells = js.at("agent_cells").get<std::vector<Cell>>();
      s.reward = js.at("reward").get<double>();
      for (int f : js.at("visited").get<std::vector<int>>()) s.visited.push_back(f != 0);
      if (s.action.size() != agents || s.agent_cells.size() != agents || s.visited.size() != landmarks) {
        throw ValidationError("trace step has inconsistent lengths");
      }
      for (Cell c : s.agent_cells) {
        if (!trace.instance.in_range(c) || trace.instance.is_wall(c)) {
          throw ValidationError("trace agent on invalid cell: " + std::to_string(c));
        }
      }
      trace.steps.push_back(std::move(s));
    }
    trace.termination = termination_from_string(doc.at("termination").get<std::string>());
    trace.tails = doc.at("tails").get<std::vector<std::vector<Cell>>>();
    trace.total_distance = doc.at("total_distance").get<int>();
    trace.success = doc.at("success").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed trace document: ") + e.what());
  }
  return trace;
}

std::string serialize_trace(const EpisodeTrace& trace) { return trace_to_json(trace).dump(1) + "\n"; }

EpisodeTrace parse_trace(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("malformed trace document: ") + e.what());
  }
  return trace_from_json(doc);
}

}  // namespace gridroute
