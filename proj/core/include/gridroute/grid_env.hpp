#pragma once

#include <vector>

#include "gridroute/problem.hpp"
#include "gridroute/trace.hpp"

namespace gridroute {

struct EnvState {
  std::vector<Cell> agent_cells;
  std::vector<bool> visited;
  int step_count = 0;

  bool all_visited() const;
  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Distance used inside the reward. Manhattan is the reference behaviour;
/// Bfs (wall-aware) is an experimental switch.
enum class RewardMetric { Manhattan, Bfs };

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool terminal = false;
};

EnvState reset(const ProblemInstance& instance);

/// Neighbour in the move direction, or `cell` itself when the target is a
/// wall or off the grid.
Cell apply_move(Cell cell, Move move, const ProblemInstance& instance);

/// 0 when everything is visited, otherwise minus the sum over unvisited
/// landmarks of the distance to the closest agent.
double compute_reward(const EnvState& state, const ProblemInstance& instance,
                      RewardMetric metric = RewardMetric::Manhattan);

bool is_terminal(const EnvState& state, int max_steps);

/// Moves all agents at once, marks landmarks hosting an agent as visited,
/// then scores the new state. Throws ValidationError on a terminal state.
StepResult step(const EnvState& state, const JointAction& action,
                const ProblemInstance& instance, int max_steps,
                RewardMetric metric = RewardMetric::Manhattan);

/// Wall-respecting route from `cell` back to the depot, inclusive at both
/// ends. Greedy toward the depot (horizontal first), switching to a BFS
/// shortest path once greedy is blocked or stalls for two steps.
std::vector<Cell> tail_return_route(Cell cell, const ProblemInstance& instance);

/// Cells actually changed during the episode plus tail moves, summed over
/// agents. Throws ValidationError for an empty or unclosed trace.
int total_distance(const EpisodeTrace& trace);

}  // namespace gridroute
