#include "gridroute/eval_harness.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "gridroute/error.hpp"
#include "gridroute/oracle_solver.hpp"
#include "gridroute/problem_gen.hpp"

namespace gridroute {

namespace {

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<Move> step_toward(Cell at, Cell goal, const ProblemInstance& instance) {
  // Same axis rule as guided_subaction, against a fixed goal.
  EnvState probe;
  probe.agent_cells = {at};
  ProblemInstance single = instance;
  single.landmarks = {goal};
  probe.visited = {false};
  return guided_subaction(0, probe, single);
}

}  // namespace

std::string Policy::name() const {
  switch (kind) {
    case PolicyKind::Network: return "network";
    case PolicyKind::Random: return "random";
    case PolicyKind::GreedyLandmark: return "greedy-landmark";
  }
  return "unknown";
}

JointAction greedy_landmark_action(const EnvState& state, const ProblemInstance& instance, Rng& rng) {
  const auto agents = state.agent_cells.size();
  std::vector<bool> claimed(instance.landmarks.size(), false);
  JointAction action(agents, Move::Left);
  for (std::size_t i = 0; i < agents; ++i) {
    const Cell at = state.agent_cells[i];
    int target = -1;
    for (int pass = 0; pass < 2 && target < 0; ++pass) {
      int best = 0;
      for (std::size_t j = 0; j < instance.landmarks.size(); ++j) {
        if (state.visited[j] || (pass == 0 && claimed[j])) continue;
        const int d = manhattan(at, instance.landmarks[j], instance.cols);
        if (target < 0 || d < best) {
          target = static_cast<int>(j);
          best = d;
        }
      }
    }
    std::optional<Move> m;
    if (target >= 0) {
      claimed[static_cast<std::size_t>(target)] = true;
      m = step_toward(at, instance.landmarks[static_cast<std::size_t>(target)], instance);
    }
    action[i] = m ? *m : static_cast<Move>(rng.uniform_index(kNumMoves));
  }
  return action;
}

EpisodeTrace rollout(const Policy& policy, const ProblemInstance& instance, int max_steps, std::uint64_t seed,
                     std::string instance_id) {
  if (policy.kind == PolicyKind::Network) {
    if (!policy.net) throw ValidationError("network policy without a network");
    const int in = state_size(instance.num_agents, static_cast<int>(instance.landmarks.size()));
    if (policy.net->input_size() != in || policy.net->output_size() != q_size(instance.num_agents)) {
      throw ValidationError("shape mismatch: network does not fit the instance");
    }
  }
  EpisodeTrace trace;
  trace.instance = instance;
  trace.instance_id = instance_id.empty() ? instance.name.value_or("") : std::move(instance_id);
  trace.policy = policy.name();

  Rng rng(seed);
  EnvState state = reset(instance);
  while (!is_terminal(state, max_steps)) {
    JointAction action;
    switch (policy.kind) {
      case PolicyKind::Network: action = greedy_joint_action(*policy.net, state, instance); break;
      case PolicyKind::GreedyLandmark: action = greedy_landmark_action(state, instance, rng); break;
      case PolicyKind::Random:
        action.resize(state.agent_cells.size());
        for (auto& m : action) m = static_cast<Move>(rng.uniform_index(kNumMoves));
        break;
    }
    StepResult r = step(state, action, instance, max_steps);
    trace.steps.push_back({std::move(action), r.state.agent_cells, r.reward, r.state.visited});
    state = std::move(r.state);
  }
  trace.success = state.all_visited();
  trace.termination = trace.success ? Termination::AllVisited : Termination::StepLimit;
  for (Cell c : state.agent_cells) trace.tails.push_back(tail_return_route(c, instance));
  trace.total_distance = total_distance(trace);
  return trace;
}

std::optional<double> optimality_gap(int policy_distance, int oracle_distance, bool success) {
  if (!success) return std::nullopt;
  if (oracle_distance == 0) return policy_distance == 0 ? std::optional<double>(1.0) : std::nullopt;
  return static_cast<double>(policy_distance) / static_cast<double>(oracle_distance);
}

std::vector<NamedInstance> evaluation_instances(const GeneratorConfig& environment, std::uint64_t eval_seed, int count,
                                                std::span<const ProblemInstance> exclude) {
  std::set<std::vector<Cell>> seen;
  for (const auto& p : exclude) {
    std::vector<Cell> key = p.landmarks;
    std::sort(key.begin(), key.end());
    seen.insert(std::move(key));
  }
  std::vector<NamedInstance> out;
  for (int k = 0; static_cast<int>(out.size()) < count; ++k) {
    GeneratorConfig g = environment;
    g.seed = evaluation_instance_seed(eval_seed, k);
    ProblemInstance inst = generate(g);
    std::vector<Cell> key = inst.landmarks;
    std::sort(key.begin(), key.end());
    if (seen.contains(key)) continue;
    inst.name = "eval-" + std::to_string(k);
    out.push_back({*inst.name, std::move(inst)});
  }
  return out;
}

SuiteReport evaluate_suite(const Policy& policy, std::span<const NamedInstance> instances, const EvalConfig& config) {
  if (instances.empty()) throw ValidationError("evaluation suite is empty");
  SuiteReport report;
  report.policy = policy.name();
  std::vector<double> gaps;
  std::vector<double> distances;
  double steps_sum = 0.0;
  int successes = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const NamedInstance& ni = instances[k];
    SuiteRow row;
    row.instance_id = ni.id;
    try {
      const std::uint64_t seed = derive_seed(config.seed, k);
      EpisodeTrace trace;
      if (policy.kind == PolicyKind::Network && config.finetune_episodes > 0) {
        const QNetwork tuned = fine_tune(*policy.net, ni.instance, config.finetune, config.finetune_episodes);
        trace = rollout(Policy::network(tuned), ni.instance, config.max_steps, seed, ni.id);
      } else {
        trace = rollout(policy, ni.instance, config.max_steps, seed, ni.id);
      }
      row.policy_distance = trace.total_distance;
      row.success = trace.success;
      row.steps = static_cast<int>(trace.steps.size());
      row.oracle_distance = solve_exact(ni.instance).total_distance;
      row.gap = optimality_gap(row.policy_distance, row.oracle_distance, row.success);
      if (row.success) {
        ++successes;
        distances.push_back(row.policy_distance);
        if (row.gap) gaps.push_back(*row.gap);
        if (row.policy_distance < row.oracle_distance) ++report.aggregates.lower_bound_violations;
      }
      steps_sum += row.steps;
    } catch (const std::exception& e) {
      row.error = e.what();
      ++report.aggregates.errors;
    }
    report.rows.push_back(std::move(row));
  }
  auto& agg = report.aggregates;
  agg.instances = instances.size();
  agg.success_rate = static_cast<double>(successes) / static_cast<double>(instances.size());
  agg.median_gap = median(gaps);
  agg.median_distance = median(distances);
  const auto evaluated = instances.size() - static_cast<std::size_t>(agg.errors);
  agg.mean_steps = evaluated > 0 ? steps_sum / static_cast<double>(evaluated) : 0.0;
  return report;
}

std::string report_csv(const SuiteReport& report) {
  std::ostringstream out;
  out << "instance_id,policy_distance,oracle_distance,gap,success,steps,error\n";
  for (const auto& r : report.rows) {
    char gap[32] = "";
    if (r.gap) std::snprintf(gap, sizeof gap, "%.6f", *r.gap);
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << r.instance_id << ',' << r.policy_distance << ',' << r.oracle_distance << ',' << gap << ','
        << (r.success ? 1 : 0) << ',' << r.steps << ',' << err << '\n';
  }
  return out.str();
}

nlohmann::json report_aggregates_json(const SuiteReport& report) {
  const auto& a = report.aggregates;
  nlohmann::json j{{"policy", report.policy},
                   {"instances", a.instances},
                   {"success_rate", a.success_rate},
                   {"mean_steps", a.mean_steps},
                   {"lower_bound_violations", a.lower_bound_violations},
                   {"errors", a.errors}};
  j["median_gap"] = a.median_gap ? nlohmann::json(*a.median_gap) : nlohmann::json(nullptr);
  j["median_distance"] = a.median_distance ? nlohmann::json(*a.median_distance) : nlohmann::json(nullptr);
  return j;
}

}  // namespace gridroute
