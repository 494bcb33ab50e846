#include "gridroute/cli/render.hpp"

#include <sstream>

#include "gridroute/error.hpp"
#include "gridroute/grid_env.hpp"

namespace gridroute::cli {
namespace {

char agent_glyph(std::size_t index) { return index < 10 ? static_cast<char>('0' + index) : '*'; }

void draw_grid(std::ostringstream& os, const ProblemInstance& p, const std::vector<Cell>& agents,
               const std::vector<bool>& visited) {
  std::vector<char> grid(static_cast<std::size_t>(p.cell_count()), '.');
  for (Cell w : p.walls) grid[static_cast<std::size_t>(w)] = '#';
  grid[static_cast<std::size_t>(p.depot)] = 'D';
  for (std::size_t j = 0; j < p.landmarks.size(); ++j) {
    grid[static_cast<std::size_t>(p.landmarks[j])] = visited[j] ? 'f' : 'F';
  }
  // Later agents overwrite earlier ones on a shared cell.
  for (std::size_t i = 0; i < agents.size(); ++i) grid[static_cast<std::size_t>(agents[i])] = agent_glyph(i);
  for (int r = 0; r < p.rows; ++r) {
    os << "  ";
    for (int c = 0; c < p.cols; ++c) os << grid[static_cast<std::size_t>(r * p.cols + c)];
    os << '\n';
  }
}

std::string frames(const EpisodeTrace& t) {
  const ProblemInstance& p = t.instance;
  std::ostringstream os;
  os << "legend: # wall, D depot, F landmark, f visited landmark, . free, 0-" << (p.num_agents - 1)
     << " agents (highest index shown when agents share a cell)\n";
  const EnvState start = reset(p);
  os << "step 0 (reset)\n";
  draw_grid(os, p, start.agent_cells, start.visited);
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const StepRecord& s = t.steps[k];
    os << "step " << (k + 1) << " action ";
    for (Move m : s.action) os << move_letter(m);
    os << " reward " << s.reward << '\n';
    draw_grid(os, p, s.agent_cells, s.visited);
  }
  os << "termination: " << to_string(t.termination) << '\n';
  return os.str();
}

std::string summary(const EpisodeTrace& t) {
  const ProblemInstance& p = t.instance;
  std::ostringstream os;
  os << "instance: " << (t.instance_id.empty() ? "-" : t.instance_id) << "  policy: "
     << (t.policy.empty() ? "-" : t.policy) << "  termination: " << to_string(t.termination)
     << "  steps: " << t.steps.size() << '\n';
  os << "moves:\n";
  for (int i = 0; i < p.num_agents; ++i) {
    os << "  agent " << i << ": ";
    for (const StepRecord& s : t.steps) os << move_letter(s.action[static_cast<std::size_t>(i)]);
    os << '\n';
  }
  os << "tails:\n";
  for (std::size_t i = 0; i < t.tails.size(); ++i) {
    os << "  agent " << i << ": " << route_moves(t.tails[i], p.cols) << '\n';
  }
  if (t.tails.empty()) os << "  (open trace)\n";
  os << "total distance: " << t.total_distance << "  success: " << (t.success ? "yes" : "no") << '\n';
  return os.str();
}

}  // namespace

std::string route_moves(const std::vector<Cell>& route, int cols) {
  std::string moves;
  for (std::size_t k = 1; k < route.size(); ++k) {
    const Cell d = route[k] - route[k - 1];
    if (d == -1) moves += 'L';
    else if (d == 1) moves += 'R';
    else if (d == -cols) moves += 'U';
    else if (d == cols) moves += 'D';
    else throw ValidationError("route is not a sequence of unit moves");
  }
  return moves;
}

std::string render_trace(const EpisodeTrace& trace, RenderMode mode) {
  for (const StepRecord& s : trace.steps) {
    if (static_cast<int>(s.action.size()) != trace.instance.num_agents) {
      throw ValidationError("malformed trace: action width does not match agent count");
    }
  }
  return mode == RenderMode::Frames ? frames(trace) : summary(trace);
}

}  // namespace gridroute::cli
