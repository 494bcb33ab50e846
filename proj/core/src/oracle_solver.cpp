#include "gridroute/oracle_solver.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include "gridroute/error.hpp"
#include "gridroute/grid_env.hpp"

namespace gridroute {

std::vector<Cell> DistanceField::path_to(Cell target) const {
  if (!reachable(target)) throw ValidationError("target unreachable: " + std::to_string(target));
  std::vector<Cell> path;
  for (Cell c = target; c != -1; c = parent[static_cast<std::size_t>(c)]) path.push_back(c);
  std::reverse(path.begin(), path.end());
  return path;
}

DistanceField bfs_distances(const ProblemInstance& instance, Cell source) {
  if (!instance.in_range(source)) throw ValidationError("cell out of range: " + std::to_string(source));
  if (instance.is_wall(source)) throw ValidationError("BFS source is a wall cell");

  const auto n = static_cast<std::size_t>(instance.cell_count());
  DistanceField field;
  field.source = source;
  field.distance.assign(n, kUnreachable);
  field.parent.assign(n, -1);
  field.distance[static_cast<std::size_t>(source)] = 0;

  std::queue<Cell> frontier;
  frontier.push(source);
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    for (Move m : kAllMoves) {
      const Cell nb = apply_move(c, m, instance);
      if (nb == c || field.reachable(nb)) continue;
      field.distance[static_cast<std::size_t>(nb)] = field.at(c) + 1;
      field.parent[static_cast<std::size_t>(nb)] = c;
      frontier.push(nb);
    }
  }
  return field;
}

namespace {

struct SubsetTour {
  int cost = 0;
  std::vector<int> order;
};

}  // namespace

OptimalSolution solve_exact(const ProblemInstance& instance) {
  const int num_landmarks = static_cast<int>(instance.landmarks.size());
  const int num_agents = instance.num_agents;

  // Node 0 is the depot, node j+1 is landmark j.
  std::vector<DistanceField> fields;
  fields.reserve(static_cast<std::size_t>(num_landmarks) + 1);
  fields.push_back(bfs_distances(instance, instance.depot));
  for (Cell l : instance.landmarks) {
    if (!fields.front().reachable(l)) {
      throw ValidationError("landmark unreachable from depot: " + std::to_string(l));
    }
    fields.push_back(bfs_distances(instance, l));
  }
  auto node_cell = [&](int node) { return node == 0 ? instance.depot : instance.landmarks[static_cast<std::size_t>(node - 1)]; };
  auto dist = [&](int from, int to) { return fields[static_cast<std::size_t>(from)].at(node_cell(to)); };

  // Best closed tour for every landmark subset; the first minimum in
  // lexicographic permutation order wins.
  const std::size_t num_masks = std::size_t{1} << num_landmarks;
  std::vector<SubsetTour> best(num_masks);
  for (std::size_t mask = 1; mask < num_masks; ++mask) {
    std::vector<int> order;
    for (int j = 0; j < num_landmarks; ++j) {
      if (mask & (std::size_t{1} << j)) order.push_back(j);
    }
    bool first = true;
    do {
      int cost = dist(0, order.front() + 1);
      for (std::size_t k = 1; k < order.size(); ++k) cost += dist(order[k - 1] + 1, order[k] + 1);
      cost += dist(order.back() + 1, 0);
      if (first || cost < best[mask].cost) {
        best[mask] = {cost, order};
        first = false;
      }
    } while (std::next_permutation(order.begin(), order.end()));
  }

  // Assignments in lexicographic order, landmark 0 most significant.
  std::vector<int> assignment(static_cast<std::size_t>(num_landmarks), 0);
  std::vector<int> best_assignment = assignment;
  int best_total = -1;
  std::vector<std::size_t> masks(static_cast<std::size_t>(num_agents));
  while (true) {
    std::fill(masks.begin(), masks.end(), 0);
    for (int j = 0; j < num_landmarks; ++j) {
      masks[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] |= std::size_t{1} << j;
    }
    int total = 0;
    for (std::size_t m : masks) total += best[m].cost;
    if (best_total < 0 || total < best_total) {
      best_total = total;
      best_assignment = assignment;
    }
    int pos = num_landmarks - 1;
    while (pos >= 0 && assignment[static_cast<std::size_t>(pos)] == num_agents - 1) {
      assignment[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++assignment[static_cast<std::size_t>(pos)];
  }

  OptimalSolution solution;
  solution.total_distance = std::max(best_total, 0);
  solution.landmark_orders.resize(static_cast<std::size_t>(num_agents));
  solution.routes.resize(static_cast<std::size_t>(num_agents));
  for (int a = 0; a < num_agents; ++a) {
    std::size_t mask = 0;
    for (int j = 0; j < num_landmarks; ++j) {
      if (best_assignment[static_cast<std::size_t>(j)] == a) mask |= std::size_t{1} << j;
    }
    auto& route = solution.routes[static_cast<std::size_t>(a)];
    route.push_back(instance.depot);
    if (mask == 0) continue;
    const auto& order = best[mask].order;
    solution.landmark_orders[static_cast<std::size_t>(a)] = order;
    int prev = 0;
    auto append_leg = [&](int from, int to) {
      const auto leg = fields[static_cast<std::size_t>(from)].path_to(node_cell(to));
      route.insert(route.end(), leg.begin() + 1, leg.end());
    };
    for (int j : order) {
      append_leg(prev, j + 1);
      prev = j + 1;
    }
    append_leg(prev, 0);
  }
  return solution;
}

nlohmann::json solution_to_json(const OptimalSolution& solution) {
  return nlohmann::json{{"total_distance", solution.total_distance},
                        {"landmark_orders", solution.landmark_orders},
                        {"routes", solution.routes}};
}

}  // namespace gridroute
