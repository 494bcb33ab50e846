#pragma once

#include <string>

#include "gridroute/cli/run_config.hpp"
#include "gridroute/trace.hpp"

namespace gridroute::cli {

/// Frames: one grid for the reset state and one per step. Summary: per-agent
/// move strings (L/R/U/D), tail moves, and totals. Never modifies the trace.
std::string render_trace(const EpisodeTrace& trace, RenderMode mode);

/// Moves between consecutive cells of a unit-step route.
std::string route_moves(const std::vector<Cell>& route, int cols);

}  // namespace gridroute::cli
