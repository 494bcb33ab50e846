#pragma once

#include <limits>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridroute/problem.hpp"

namespace gridroute {

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Shortest 4-connected wall-avoiding path lengths from one source cell,
/// with the BFS parent tree for route reconstruction.
struct DistanceField {
  Cell source = 0;
  std::vector<int> distance;  // kUnreachable for walls and cut-off cells
  std::vector<Cell> parent;   // -1 for the source and unreachable cells

  int at(Cell c) const { return distance[static_cast<std::size_t>(c)]; }
  bool reachable(Cell c) const { return at(c) != kUnreachable; }

  /// Cells from source to `target`, both inclusive.
  std::vector<Cell> path_to(Cell target) const;
};

/// Neighbours are expanded in move order (Left, Right, Up, Down), which
/// fixes the parent tree. Throws ValidationError for a wall source.
DistanceField bfs_distances(const ProblemInstance& instance, Cell source);

struct OptimalSolution {
  int total_distance = 0;
  /// Per agent, landmark slot indices in visiting order.
  std::vector<std::vector<int>> landmark_orders;
  /// Per agent, full cell route depot -> ... -> depot.
  std::vector<std::vector<Cell>> routes;
};

/// Brute force over every landmark-to-agent assignment and every visiting
/// order, costed with BFS distances. Ties resolve to the lexicographically
/// smallest assignment, then the smallest order.
OptimalSolution solve_exact(const ProblemInstance& instance);

nlohmann::json solution_to_json(const OptimalSolution& solution);

}  // namespace gridroute
