#include "gridroute/grid_env.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "gridroute/error.hpp"
#include "gridroute/oracle_solver.hpp"
#include "gridroute/state_codec.hpp"

namespace gridroute {

bool EnvState::all_visited() const {
  return std::all_of(visited.begin(), visited.end(), [](bool v) { return v; });
}

EnvState reset(const ProblemInstance& instance) {
  validate_instance(instance);
  EnvState s;
  s.agent_cells.assign(static_cast<std::size_t>(instance.num_agents), instance.depot);
  s.visited.assign(instance.landmarks.size(), false);
  return s;
}

Cell apply_move(Cell cell, Move move, const ProblemInstance& instance) {
  int row = cell / instance.cols;
  int col = cell % instance.cols;
  switch (move) {
    case Move::Left: --col; break;
    case Move::Right: ++col; break;
    case Move::Up: --row; break;
    case Move::Down: ++row; break;
  }
  if (row < 0 || row >= instance.rows || col < 0 || col >= instance.cols) return cell;
  const Cell target = row * instance.cols + col;
  return instance.is_wall(target) ? cell : target;
}

double compute_reward(const EnvState& state, const ProblemInstance& instance, RewardMetric metric) {
  if (state.all_visited()) return 0.0;
  int sum = 0;
  for (std::size_t j = 0; j < instance.landmarks.size(); ++j) {
    if (state.visited[j]) continue;
    const Cell l = instance.landmarks[j];
    int nearest = kUnreachable;
    if (metric == RewardMetric::Manhattan) {
      for (Cell a : state.agent_cells) nearest = std::min(nearest, manhattan(a, l, instance.cols));
    } else {
      const DistanceField field = bfs_distances(instance, l);
      for (Cell a : state.agent_cells) nearest = std::min(nearest, field.at(a));
    }
    sum += nearest;
  }
  return -static_cast<double>(sum);
}

bool is_terminal(const EnvState& state, int max_steps) {
  return state.all_visited() || state.step_count >= max_steps;
}

StepResult step(const EnvState& state, const JointAction& action, const ProblemInstance& instance,
                int max_steps, RewardMetric metric) {
  if (is_terminal(state, max_steps)) throw ValidationError("cannot step a terminal state");
  if (action.size() != state.agent_cells.size()) {
    throw ValidationError("joint action length " + std::to_string(action.size()) +
                          " does not match agent count " + std::to_string(state.agent_cells.size()));
  }
  StepResult out{state, 0.0, false};
  EnvState& next = out.state;
  for (std::size_t i = 0; i < action.size(); ++i) {
    next.agent_cells[i] = apply_move(state.agent_cells[i], action[i], instance);
  }
  for (std::size_t j = 0; j < instance.landmarks.size(); ++j) {
    if (next.visited[j]) continue;
    next.visited[j] = std::find(next.agent_cells.begin(), next.agent_cells.end(),
                                instance.landmarks[j]) != next.agent_cells.end();
  }
  ++next.step_count;
  out.reward = compute_reward(next, instance, metric);
  out.terminal = is_terminal(next, max_steps);
  return out;
}

std::vector<Cell> tail_return_route(Cell cell, const ProblemInstance& instance) {
  const DistanceField to_depot = bfs_distances(instance, instance.depot);
  if (!instance.in_range(cell) || !to_depot.reachable(cell)) {
    throw ValidationError("cell unreachable from depot: " + std::to_string(cell));
  }

  std::vector<Cell> route{cell};
  const int depot_row = instance.depot / instance.cols;
  const int depot_col = instance.depot % instance.cols;
  int stalls = 0;
  Cell at = cell;
  while (at != instance.depot) {
    const int dr = depot_row - at / instance.cols;
    const int dc = depot_col - at % instance.cols;
    Move greedy;
    if (std::abs(dc) >= std::abs(dr)) {
      greedy = dc < 0 ? Move::Left : Move::Right;
    } else {
      greedy = dr < 0 ? Move::Up : Move::Down;
    }
    const Cell next = apply_move(at, greedy, instance);
    if (next == at) break;
    // Each stall costs at most two extra moves; cap them so the route stays
    // within the BFS distance plus four.
    if (to_depot.at(next) >= to_depot.at(at)) ++stalls;
    route.push_back(next);
    at = next;
    if (stalls >= 2) break;
  }
  // BFS parents point toward the depot.
  while (at != instance.depot) {
    at = to_depot.parent[static_cast<std::size_t>(at)];
    route.push_back(at);
  }
  return route;
}

int total_distance(const EpisodeTrace& trace) {
  if (trace.steps.empty()) throw ValidationError("trace has no steps");
  const auto agents = static_cast<std::size_t>(trace.instance.num_agents);
  if (trace.tails.size() != agents) throw ValidationError("trace is missing tail routes");
  int total = 0;
  for (std::size_t i = 0; i < agents; ++i) {
    Cell prev = trace.instance.depot;
    for (const StepRecord& s : trace.steps) {
      if (s.agent_cells[i] != prev) ++total;
      prev = s.agent_cells[i];
    }
    if (trace.tails[i].empty()) throw ValidationError("empty tail route");
    total += static_cast<int>(trace.tails[i].size()) - 1;
  }
  return total;
}

}  // namespace gridroute
