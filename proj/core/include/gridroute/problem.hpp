#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridroute {

/// Row-major cell index, `cols * row + col`, row 0 at the top.
using Cell = std::int32_t;

struct GridCoord {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridCoord&, const GridCoord&) = default;
};

/// Encoding order is fixed: it defines the Q-output slot layout.
enum class Move : std::uint8_t { Left = 0, Right = 1, Up = 2, Down = 3 };

inline constexpr std::array<Move, 4> kAllMoves = {Move::Left, Move::Right, Move::Up, Move::Down};
inline constexpr int kNumMoves = 4;

constexpr int move_index(Move m) { return static_cast<int>(m); }
Move move_from_index(int index);
char move_letter(Move m);

/// One move per agent, applied simultaneously.
using JointAction = std::vector<Move>;

/// A routing problem on a fixed grid: agents start and end at the depot and
/// must collectively visit every landmark at least once.
struct ProblemInstance {
  int rows = 7;
  int cols = 7;
  std::vector<Cell> walls;      // sorted ascending
  Cell depot = 24;
  std::vector<Cell> landmarks;  // order defines the visited-flag slots
  int num_agents = 3;
  std::optional<std::string> name;

  int cell_count() const { return rows * cols; }
  bool in_range(Cell c) const { return c >= 0 && c < cell_count(); }
  bool is_wall(Cell c) const;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

/// Throws ValidationError naming the first violated invariant.
void validate_instance(const ProblemInstance& instance);

/// Sorts and deduplicates the wall list.
void canonicalize(ProblemInstance& instance);

/// Project default layout: 7x7, depot at the centre, six symmetric walls.
namespace defaults {
inline constexpr int kRows = 7;
inline constexpr int kCols = 7;
inline constexpr Cell kDepot = 24;
inline const std::vector<Cell> kWalls = {8, 12, 22, 26, 36, 40};
inline constexpr int kNumLandmarks = 5;
inline constexpr int kNumAgents = 3;
inline constexpr int kMaxSteps = 50;
}  // namespace defaults

}  // namespace gridroute
