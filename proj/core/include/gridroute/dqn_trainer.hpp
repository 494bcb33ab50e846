#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "gridroute/checkpoint.hpp"
#include "gridroute/error.hpp"
#include "gridroute/grid_env.hpp"
#include "gridroute/neural_net.hpp"
#include "gridroute/problem_gen.hpp"
#include "gridroute/rng.hpp"
#include "gridroute/state_codec.hpp"

namespace gridroute {

struct Transition {
  StateVec state;
  JointAction action;
  double reward = 0.0;
  StateVec next_state;
  bool terminal = false;
  std::uint64_t sequence = 0;  // assigned by ReplayMemory::push
};

/// Bounded FIFO experience store; the oldest transition is evicted first.
class ReplayMemory {
public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);

  /// Uniform draw with replacement. Throws ValidationError if fewer than
  /// `batch_size` transitions are stored.
  std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Index 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const { return items_[i]; }

private:
  std::size_t capacity_;
  std::uint64_t next_sequence_ = 0;
  std::deque<Transition> items_;
};

struct LinearSchedule {
  double start = 1.0;
  double end = 0.0;
  int anneal_episodes = 1;
};

/// Linear from start to end over anneal_episodes, then held at end.
double anneal(const LinearSchedule& schedule, int episode_index);

struct TrainerConfig {
  double gamma = 0.95;
  AdamConfig adam{};
  std::size_t replay_capacity = 10000;
  std::size_t batch_size = 32;
  std::size_t learn_start = 500;
  int target_sync_interval = 200;
  int updates_per_step = 1;
  LinearSchedule epsilon{1.0, 0.05, 300};
  LinearSchedule heuristic{0.5, 0.05, 300};
  int problems = 20;
  int episodes_per_problem = 30;
  int max_steps = defaults::kMaxSteps;
  std::uint64_t master_seed = 42;
  std::vector<int> hidden_layers{512, 512};
  double grad_clip = 10.0;
  /// Multiplies rewards inside TD targets only; stored rewards stay raw.
  double reward_scale = 1.0;
  RewardMetric reward_metric = RewardMetric::Manhattan;
  /// Fixed environment; the seed field is ignored (problems are seeded from
  /// master_seed).
  GeneratorConfig environment{};

  std::vector<int> layer_sizes() const;
  void validate() const;
};

nlohmann::json trainer_config_to_json(const TrainerConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
TrainerConfig trainer_config_from_json(const nlohmann::json& doc);
std::string config_hash(const TrainerConfig& config);

/// Move toward the nearest unvisited landmark (Manhattan, ties to the lower
/// slot) along the axis with the larger gap (ties horizontal), or along the
/// other axis if that one is blocked. nullopt when nothing is left to chase
/// or both moves are blocked.
std::optional<Move> guided_subaction(int agent_index, const EnvState& state, const ProblemInstance& instance);

struct SelectionStats {
  std::uint64_t guided_calls = 0;
  std::uint64_t guided_moves = 0;
  std::uint64_t random_moves = 0;
  std::uint64_t greedy_moves = 0;
};

/// Per agent: guided move with probability heuristic_p (falling through if
/// there is none), else a uniform move with probability epsilon, else the
/// network's greedy move.
JointAction select_joint_action(const QNetwork& net, const EnvState& state, const ProblemInstance& instance,
                                double epsilon, double heuristic_p, Rng& rng, SelectionStats* stats = nullptr);

JointAction greedy_joint_action(const QNetwork& net, const EnvState& state, const ProblemInstance& instance);

/// Network inputs for a batch, one normalised state per column.
Eigen::MatrixXd batch_inputs(std::span<const Transition> batch, bool next_state, int cell_count);

/// Per-head regression targets (num_agents x batch). Terminal transitions
/// target the reward; others add gamma times the head's max target Q.
Eigen::MatrixXd td_targets(std::span<const Transition> batch, const QNetwork& target_net, double gamma,
                           int cell_count, double reward_scale = 1.0);

struct MaskedLoss {
  double loss = 0.0;
  Eigen::MatrixXd grad_output;  // nonzero only on chosen-action slots
};

/// Mean over batch and heads of (target - Q(s, a_i))^2 and its gradient
/// with respect to the network output.
MaskedLoss masked_td_loss(const Eigen::MatrixXd& q, std::span<const Transition> batch, const Eigen::MatrixXd& targets);

struct TrainStepParams {
  double gamma = 0.95;
  int cell_count = 49;
  double grad_clip = 10.0;  // global L2 norm; <= 0 disables
  double reward_scale = 1.0;
};

/// One Adam update on the batch; returns the loss before the update.
/// Throws NumericalError (leaving `net` untouched) on a non-finite loss or
/// gradient.
double train_step(QNetwork& net, const QNetwork& target_net, AdamState& adam, std::span<const Transition> batch,
                   const TrainStepParams& params);

struct EpisodeRecord {
  int episode = 0;
  int problem_id = 0;
  int steps = 0;
  double reward_sum = 0.0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
  double heuristic_p = 0.0;
  bool success = false;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const EpisodeRecord& record);
void write_metrics_csv(std::ostream& out, std::span<const EpisodeRecord> records);

/// Owns the online/target networks, optimiser, replay memory and RNG
/// streams for one training run.
class DqnTrainer {
public:
  explicit DqnTrainer(TrainerConfig config);
  DqnTrainer(TrainerConfig config, QNetwork initial);

  /// Rolls out one episode with exploration, learning after every step once
  /// the replay memory holds learn_start transitions.
  EpisodeRecord run_episode(const ProblemInstance& instance, int episode_index, int problem_id);

  const TrainerConfig& config() const { return config_; }
  const QNetwork& network() const { return net_; }
  const QNetwork& target_network() const { return target_; }
  const AdamState& adam() const { return adam_; }
  const ReplayMemory& memory() const { return memory_; }
  const SelectionStats& stats() const { return stats_; }
  std::uint64_t train_steps() const { return train_steps_; }

  Checkpoint checkpoint() const;

private:
  TrainerConfig config_;
  QNetwork net_;
  QNetwork target_;
  AdamState adam_;
  ReplayMemory memory_;
  Rng explore_rng_;
  Rng replay_rng_;
  SelectionStats stats_;
  std::uint64_t train_steps_ = 0;
};

/// Thrown when training hits a numerical blowup; carries the network as it
/// was before the failing update.
class TrainingAborted : public NumericalError {
public:
  TrainingAborted(const std::string& what, Checkpoint last_good)
      : NumericalError(what), last_good_(std::move(last_good)) {}
  const Checkpoint& last_good() const { return last_good_; }

private:
  Checkpoint last_good_;
};

struct TrainingResult {
  Checkpoint checkpoint;
  std::vector<EpisodeRecord> records;
  std::vector<ProblemInstance> problems;
  SelectionStats stats;
  std::uint64_t train_steps = 0;
};

/// problems x episodes_per_problem episodes on freshly generated problems,
/// with epsilon and heuristic_p annealed by global episode index.
TrainingResult run_schedule(const TrainerConfig& config,
                            const std::function<void(const EpisodeRecord&)>& on_episode = {});

/// Training problems for a config, in schedule order.
std::vector<ProblemInstance> training_problems(const TrainerConfig& config);

/// Short per-instance training from a pre-trained network, with the
/// exploration schedules held at their end values.
QNetwork fine_tune(const QNetwork& net, const ProblemInstance& instance, const TrainerConfig& config, int episodes);

}  // namespace gridroute
