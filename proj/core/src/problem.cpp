#include "gridroute/problem.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "gridroute/error.hpp"

namespace gridroute {

Move move_from_index(int index) {
  if (index < 0 || index >= kNumMoves) {
    throw ValidationError("move index out of range: " + std::to_string(index));
  }
  return static_cast<Move>(index);
}

char move_letter(Move m) {
  switch (m) {
    case Move::Left: return 'L';
    case Move::Right: return 'R';
    case Move::Up: return 'U';
    case Move::Down: return 'D';
  }
  return '?';
}

bool ProblemInstance::is_wall(Cell c) const {
  return std::binary_search(walls.begin(), walls.end(), c);
}

void canonicalize(ProblemInstance& instance) {
  std::sort(instance.walls.begin(), instance.walls.end());
  instance.walls.erase(std::unique(instance.walls.begin(), instance.walls.end()),
                       instance.walls.end());
}

void validate_instance(const ProblemInstance& p) {
  if (p.rows <= 0 || p.cols <= 0) throw ValidationError("grid dimensions must be positive");
  if (p.num_agents <= 0) throw ValidationError("num_agents must be positive");
  if (!std::is_sorted(p.walls.begin(), p.walls.end()) ||
      std::adjacent_find(p.walls.begin(), p.walls.end()) != p.walls.end()) {
    throw ValidationError("walls must be sorted and distinct");
  }
  for (Cell w : p.walls) {
    if (!p.in_range(w)) throw ValidationError("cell out of range: wall " + std::to_string(w));
  }
  if (!p.in_range(p.depot)) throw ValidationError("cell out of range: depot " + std::to_string(p.depot));
  if (p.is_wall(p.depot)) throw ValidationError("depot on wall cell");
  for (std::size_t i = 0; i < p.landmarks.size(); ++i) {
    const Cell l = p.landmarks[i];
    if (!p.in_range(l)) throw ValidationError("cell out of range: landmark " + std::to_string(l));
    if (p.is_wall(l)) throw ValidationError("landmark on wall cell: " + std::to_string(l));
    if (l == p.depot) throw ValidationError("landmark equals depot: " + std::to_string(l));
    for (std::size_t j = 0; j < i; ++j) {
      if (p.landmarks[j] == l) throw ValidationError("duplicate landmark: " + std::to_string(l));
    }
  }

  // Every free cell must be reachable from the depot.
  std::vector<char> seen(static_cast<std::size_t>(p.cell_count()), 0);
  std::queue<Cell> frontier;
  frontier.push(p.depot);
  seen[static_cast<std::size_t>(p.depot)] = 1;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    const int r = c / p.cols;
    const int col = c % p.cols;
    const std::pair<int, int> nbrs[] = {{r, col - 1}, {r, col + 1}, {r - 1, col}, {r + 1, col}};
    for (auto [nr, nc] : nbrs) {
      if (nr < 0 || nr >= p.rows || nc < 0 || nc >= p.cols) continue;
      const Cell n = nr * p.cols + nc;
      if (seen[static_cast<std::size_t>(n)] || p.is_wall(n)) continue;
      seen[static_cast<std::size_t>(n)] = 1;
      frontier.push(n);
    }
  }
  for (Cell c = 0; c < p.cell_count(); ++c) {
    if (!p.is_wall(c) && !seen[static_cast<std::size_t>(c)]) {
      throw ValidationError("cell unreachable from depot: " + std::to_string(c));
    }
  }
}

}  // namespace gridroute
