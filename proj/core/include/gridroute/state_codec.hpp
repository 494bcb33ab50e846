#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gridroute/grid_env.hpp"
#include "gridroute/problem.hpp"

namespace gridroute {

Cell cell_index(GridCoord rc, int rows, int cols);
GridCoord cell_coord(Cell cell, int rows, int cols);

int manhattan(Cell a, Cell b, int cols);

/// Raw network observation: [agent cells | landmark cells | visited flags].
struct StateVec {
  std::vector<std::int32_t> values;
  int num_agents = 0;
  int num_landmarks = 0;

  friend bool operator==(const StateVec&, const StateVec&) = default;
};

int state_size(int num_agents, int num_landmarks);
int q_size(int num_agents);

StateVec encode_state(const EnvState& state, const ProblemInstance& instance);

/// Cell entries scaled by 1/(cell_count-1) into [0,1]; flags unchanged.
Eigen::VectorXd normalize(const StateVec& raw, int cell_count);

/// Per-agent argmax over its 4 contiguous slots; ties go to the lower slot.
/// Throws NumericalError on NaN.
JointAction decode_joint_action(std::span<const double> q);

}  // namespace gridroute
