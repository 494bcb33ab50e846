#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridroute/dqn_trainer.hpp"
#include "gridroute/neural_net.hpp"
#include "gridroute/problem.hpp"
#include "gridroute/trace.hpp"

namespace gridroute {

enum class PolicyKind { Network, Random, GreedyLandmark };

struct Policy {
  PolicyKind kind = PolicyKind::Random;
  const QNetwork* net = nullptr;  // required for PolicyKind::Network

  static Policy network(const QNetwork& net) { return {PolicyKind::Network, &net}; }
  static Policy random() { return {PolicyKind::Random, nullptr}; }
  static Policy greedy_landmark() { return {PolicyKind::GreedyLandmark, nullptr}; }

  std::string name() const;
};

/// Baseline joint action: each agent chases the nearest unvisited landmark
/// not already targeted by a lower-numbered agent (the plain nearest one if
/// every landmark is taken), stepping as guided_subaction would. Agents with
/// no usable move draw a uniform one.
JointAction greedy_landmark_action(const EnvState& state, const ProblemInstance& instance, Rng& rng);

/// Runs one episode without exploration, then closes it with a tail route
/// per agent and fills in distance and success.
EpisodeTrace rollout(const Policy& policy, const ProblemInstance& instance, int max_steps, std::uint64_t seed,
                     std::string instance_id = {});

/// policy / oracle for successful episodes, nullopt otherwise.
std::optional<double> optimality_gap(int policy_distance, int oracle_distance, bool success);

struct NamedInstance {
  std::string id;
  ProblemInstance instance;
};

/// Fresh problems for evaluation: seeds from the evaluation partition, and
/// any landmark set equal to one in `exclude` is skipped.
std::vector<NamedInstance> evaluation_instances(const GeneratorConfig& environment, std::uint64_t eval_seed, int count,
                                                std::span<const ProblemInstance> exclude = {});

struct SuiteRow {
  std::string instance_id;
  int policy_distance = 0;
  int oracle_distance = 0;
  std::optional<double> gap;
  bool success = false;
  int steps = 0;
  std::string error;  // non-empty if the instance could not be evaluated
};

struct SuiteAggregates {
  std::size_t instances = 0;
  double success_rate = 0.0;
  std::optional<double> median_gap;
  std::optional<double> median_distance;  // successful episodes only
  double mean_steps = 0.0;
  int lower_bound_violations = 0;
  int errors = 0;
};

struct SuiteReport {
  std::string policy;
  std::vector<SuiteRow> rows;
  SuiteAggregates aggregates;
};

struct EvalConfig {
  int max_steps = defaults::kMaxSteps;
  std::uint64_t seed = 0;
  /// Optional per-instance fine-tuning before the rollout (network policy
  /// only); 0 disables.
  int finetune_episodes = 0;
  TrainerConfig finetune{};
};

/// One rollout and one oracle solve per instance. Failures are recorded in
/// the row and never abort the suite.
SuiteReport evaluate_suite(const Policy& policy, std::span<const NamedInstance> instances, const EvalConfig& config);

std::string report_csv(const SuiteReport& report);
nlohmann::json report_aggregates_json(const SuiteReport& report);

}  // namespace gridroute
