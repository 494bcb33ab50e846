#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridroute/problem.hpp"

namespace gridroute {

enum class Termination { AllVisited, StepLimit };

std::string_view to_string(Termination t);

/// State of the world right after one joint action.
struct StepRecord {
  JointAction action;
  std::vector<Cell> agent_cells;
  double reward = 0.0;
  std::vector<bool> visited;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// One rolled-out episode. Agents are implicitly at the depot before step 0.
/// `tails` holds one depot-bound route per agent once the episode is closed;
/// an empty `tails` means the trace is still open.
struct EpisodeTrace {
  ProblemInstance instance;
  std::string instance_id;
  std::string policy;
  std::vector<StepRecord> steps;
  Termination termination = Termination::StepLimit;
  std::vector<std::vector<Cell>> tails;
  int total_distance = 0;
  bool success = false;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

nlohmann::json trace_to_json(const EpisodeTrace& trace);
EpisodeTrace trace_from_json(const nlohmann::json& doc);

std::string serialize_trace(const EpisodeTrace& trace);
EpisodeTrace parse_trace(std::string_view text);

}  // namespace gridroute
