#include "gridroute/state_codec.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "gridroute/error.hpp"

namespace gridroute {

Cell cell_index(GridCoord rc, int rows, int cols) {
  if (rc.row < 0 || rc.row >= rows || rc.col < 0 || rc.col >= cols) {
    throw ValidationError("cell out of range: (" + std::to_string(rc.row) + "," +
                          std::to_string(rc.col) + ")");
  }
  return cols * rc.row + rc.col;
}

GridCoord cell_coord(Cell cell, int rows, int cols) {
  if (cell < 0 || cell >= rows * cols) {
    throw ValidationError("cell out of range: " + std::to_string(cell));
  }
  return {cell / cols, cell % cols};
}

int manhattan(Cell a, Cell b, int cols) {
  return std::abs(a / cols - b / cols) + std::abs(a % cols - b % cols);
}

int state_size(int num_agents, int num_landmarks) { return num_agents + 2 * num_landmarks; }

int q_size(int num_agents) { return kNumMoves * num_agents; }

StateVec encode_state(const EnvState& state, const ProblemInstance& instance) {
  StateVec out;
  out.num_agents = instance.num_agents;
  out.num_landmarks = static_cast<int>(instance.landmarks.size());
  out.values.reserve(static_cast<std::size_t>(state_size(out.num_agents, out.num_landmarks)));
  out.values.insert(out.values.end(), state.agent_cells.begin(), state.agent_cells.end());
  out.values.insert(out.values.end(), instance.landmarks.begin(), instance.landmarks.end());
  for (bool v : state.visited) out.values.push_back(v ? 1 : 0);
  return out;
}

Eigen::VectorXd normalize(const StateVec& raw, int cell_count) {
  const double scale = cell_count > 1 ? 1.0 / static_cast<double>(cell_count - 1) : 1.0;
  const auto n = static_cast<Eigen::Index>(raw.values.size());
  const auto cells = static_cast<Eigen::Index>(raw.num_agents + raw.num_landmarks);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = raw.values[static_cast<std::size_t>(i)];
    x[i] = i < cells ? v * scale : v;
  }
  return x;
}

JointAction decode_joint_action(std::span<const double> q) {
  if (q.empty() || q.size() % kNumMoves != 0) {
    throw ValidationError("Q vector length must be a positive multiple of 4");
  }
  JointAction action;
  action.reserve(q.size() / kNumMoves);
  for (std::size_t base = 0; base < q.size(); base += kNumMoves) {
    int best = 0;
    for (int k = 0; k < kNumMoves; ++k) {
      const double v = q[base + static_cast<std::size_t>(k)];
      if (std::isnan(v)) throw NumericalError("NaN in Q output");
      if (v > q[base + static_cast<std::size_t>(best)]) best = k;
    }
    action.push_back(static_cast<Move>(best));
  }
  return action;
}

}  // namespace gridroute
