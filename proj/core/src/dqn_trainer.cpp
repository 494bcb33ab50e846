#include "gridroute/dqn_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>

namespace gridroute {

namespace {
constexpr std::uint64_t kNetStream = 1;
constexpr std::uint64_t kExploreStream = 2;
constexpr std::uint64_t kReplayStream = 3;
}  // namespace

// ---------------------------------------------------------------- replay

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("replay capacity must be positive");
}

void ReplayMemory::push(Transition t) {
  t.sequence = next_sequence_++;
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(t));
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
  if (batch_size == 0 || items_.size() < batch_size) {
    throw ValidationError("replay memory holds " + std::to_string(items_.size()) + " transitions, cannot sample " +
                          std::to_string(batch_size));
  }
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(items_[rng.uniform_index(items_.size())]);
  return batch;
}

// ---------------------------------------------------------------- config

double anneal(const LinearSchedule& schedule, int episode_index) {
  if (schedule.anneal_episodes <= 0 || episode_index >= schedule.anneal_episodes) return schedule.end;
  const double frac = static_cast<double>(episode_index) / static_cast<double>(schedule.anneal_episodes);
  return schedule.start + frac * (schedule.end - schedule.start);
}

std::vector<int> TrainerConfig::layer_sizes() const {
  std::vector<int> sizes{state_size(environment.num_agents, environment.num_landmarks)};
  sizes.insert(sizes.end(), hidden_layers.begin(), hidden_layers.end());
  sizes.push_back(q_size(environment.num_agents));
  return sizes;
}

void TrainerConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in [0, 1)");
  if (!(reward_scale > 0.0)) throw ValidationError("reward_scale must be positive");
  if (!(adam.learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (replay_capacity == 0 || batch_size == 0) throw ValidationError("replay capacity and batch size must be positive");
  if (batch_size > replay_capacity) throw ValidationError("batch size exceeds replay capacity");
  if (target_sync_interval <= 0) throw ValidationError("target_sync_interval must be positive");
  if (updates_per_step <= 0) throw ValidationError("updates_per_step must be positive");
  if (problems <= 0 || episodes_per_problem <= 0 || max_steps <= 0) {
    throw ValidationError("problems, episodes_per_problem and max_steps must be positive");
  }
  for (const LinearSchedule* s : {&epsilon, &heuristic}) {
    if (s->start < 0.0 || s->start > 1.0 || s->end < 0.0 || s->end > 1.0) {
      throw ValidationError("schedule values must lie in [0, 1]");
    }
    if (s->end > s->start) throw ValidationError("schedules must be non-increasing");
    if (s->anneal_episodes <= 0) throw ValidationError("anneal_episodes must be positive");
  }
  for (int h : hidden_layers) {
    if (h <= 0) throw ValidationError("hidden layer widths must be positive");
  }
  if (environment.num_agents <= 0 || environment.num_landmarks <= 0) {
    throw ValidationError("num_agents and num_landmarks must be positive");
  }
}

nlohmann::json trainer_config_to_json(const TrainerConfig& c) {
  return nlohmann::json{
      {"gamma", c.gamma},
      {"learning_rate", c.adam.learning_rate},
      {"adam_beta1", c.adam.beta1},
      {"adam_beta2", c.adam.beta2},
      {"adam_epsilon", c.adam.epsilon},
      {"replay_capacity", c.replay_capacity},
      {"batch_size", c.batch_size},
      {"learn_start", c.learn_start},
      {"target_sync_interval", c.target_sync_interval},
      {"updates_per_step", c.updates_per_step},
      {"epsilon_start", c.epsilon.start},
      {"epsilon_end", c.epsilon.end},
      {"epsilon_anneal_episodes", c.epsilon.anneal_episodes},
      {"heuristic_start", c.heuristic.start},
      {"heuristic_end", c.heuristic.end},
      {"heuristic_anneal_episodes", c.heuristic.anneal_episodes},
      {"problems", c.problems},
      {"episodes_per_problem", c.episodes_per_problem},
      {"max_steps", c.max_steps},
      {"master_seed", c.master_seed},
      {"hidden_layers", c.hidden_layers},
      {"grad_clip", c.grad_clip},
      {"reward_scale", c.reward_scale},
      {"reward_metric", c.reward_metric == RewardMetric::Manhattan ? "manhattan" : "bfs"},
      {"rows", c.environment.rows},
      {"cols", c.environment.cols},
      {"walls", c.environment.walls},
      {"depot", c.environment.depot},
      {"num_landmarks", c.environment.num_landmarks},
      {"num_agents", c.environment.num_agents},
  };
}

TrainerConfig trainer_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("trainer config must be a JSON object");
  TrainerConfig c;
  try {
    for (const auto& [key, v] : doc.items()) {
      if (key == "gamma") c.gamma = v.get<double>();
      else if (key == "learning_rate") c.adam.learning_rate = v.get<double>();
      else if (key == "adam_beta1") c.adam.beta1 = v.get<double>();
      else if (key == "adam_beta2") c.adam.beta2 = v.get<double>();
      else if (key == "adam_epsilon") c.adam.epsilon = v.get<double>();
      else if (key == "replay_capacity") c.replay_capacity = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "learn_start") c.learn_start = v.get<std::size_t>();
      else if (key == "target_sync_interval") c.target_sync_interval = v.get<int>();
      else if (key == "updates_per_step") c.updates_per_step = v.get<int>();
      else if (key == "epsilon_start") c.epsilon.start = v.get<double>();
      else if (key == "epsilon_end") c.epsilon.end = v.get<double>();
      else if (key == "epsilon_anneal_episodes") c.epsilon.anneal_episodes = v.get<int>();
      else if (key == "heuristic_start") c.heuristic.start = v.get<double>();
      else if (key == "heuristic_end") c.heuristic.end = v.get<double>();
      else if (key == "heuristic_anneal_episodes") c.heuristic.anneal_episodes = v.get<int>();
      else if (key == "problems") c.problems = v.get<int>();
      else if (key == "episodes_per_problem") c.episodes_per_problem = v.get<int>();
      else if (key == "max_steps") c.max_steps = v.get<int>();
      else if (key == "master_seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "hidden_layers") c.hidden_layers = v.get<std::vector<int>>();
      else if (key == "grad_clip") c.grad_clip = v.get<double>();
      else if (key == "reward_scale") c.reward_scale = v.get<double>();
      else if (key == "reward_metric") {
        const auto m = v.get<std::string>();
        if (m == "manhattan") c.reward_metric = RewardMetric::Manhattan;
        else if (m == "bfs") c.reward_metric = RewardMetric::Bfs;
        else throw ValidationError("unknown reward_metric: " + m);
      } else if (key == "rows") c.environment.rows = v.get<int>();
      else if (key == "cols") c.environment.cols = v.get<int>();
      else if (key == "walls") c.environment.walls = v.get<std::vector<Cell>>();
      else if (key == "depot") c.environment.depot = v.get<Cell>();
      else if (key == "num_landmarks") c.environment.num_landmarks = v.get<int>();
      else if (key == "num_agents") c.environment.num_agents = v.get<int>();
      else throw ValidationError("unknown trainer config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed trainer config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const TrainerConfig& config) { return sha256_hex(trainer_config_to_json(config).dump()); }

// ---------------------------------------------------------------- acting

std::optional<Move> guided_subaction(int agent_index, const EnvState& state, const ProblemInstance& instance) {
  const Cell at = state.agent_cells[static_cast<std::size_t>(agent_index)];
  int target = -1;
  int best = 0;
  for (std::size_t j = 0; j < instance.landmarks.size(); ++j) {
    if (state.visited[j]) continue;
    const int d = manhattan(at, instance.landmarks[j], instance.cols);
    if (target < 0 || d < best) {
      target = static_cast<int>(j);
      best = d;
    }
  }
  if (target < 0) return std::nullopt;

  const Cell goal = instance.landmarks[static_cast<std::size_t>(target)];
  const int dr = goal / instance.cols - at / instance.cols;
  const int dc = goal % instance.cols - at % instance.cols;
  const Move horizontal = dc < 0 ? Move::Left : Move::Right;
  const Move vertical = dr < 0 ? Move::Up : Move::Down;
  const bool horizontal_first = std::abs(dc) >= std::abs(dr);

  const Move primary = horizontal_first ? horizontal : vertical;
  if (apply_move(at, primary, instance) != at) return primary;

  // Blocked: go along the other axis, sidestepping if already aligned on it.
  const int other_delta = horizontal_first ? dr : dc;
  if (other_delta != 0) {
    const Move secondary = horizontal_first ? vertical : horizontal;
    if (apply_move(at, secondary, instance) != at) return secondary;
    return std::nullopt;
  }
  const std::array<Move, 2> sidesteps =
      horizontal_first ? std::array<Move, 2>{Move::Up, Move::Down} : std::array<Move, 2>{Move::Left, Move::Right};
  for (Move m : sidesteps) {
    if (apply_move(at, m, instance) != at) return m;
  }
  return std::nullopt;
}

JointAction greedy_joint_action(const QNetwork& net, const EnvState& state, const ProblemInstance& instance) {
  const Eigen::VectorXd q = forward(net, normalize(encode_state(state, instance), instance.cell_count()));
  return decode_joint_action(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

JointAction select_joint_action(const QNetwork& net, const EnvState& state, const ProblemInstance& instance,
                                double epsilon, double heuristic_p, Rng& rng, SelectionStats* stats) {
  const auto agents = state.agent_cells.size();
  JointAction action(agents, Move::Left);
  std::optional<JointAction> greedy;
  for (std::size_t i = 0; i < agents; ++i) {
    if (heuristic_p > 0.0 && rng.uniform01() < heuristic_p) {
      if (stats) ++stats->guided_calls;
      if (auto m = guided_subaction(static_cast<int>(i), state, instance)) {
        action[i] = *m;
        if (stats) ++stats->guided_moves;
        continue;
      }
    }
    if (epsilon > 0.0 && rng.uniform01() < epsilon) {
      action[i] = static_cast<Move>(rng.uniform_index(kNumMoves));
      if (stats) ++stats->random_moves;
      continue;
    }
    if (!greedy) greedy = greedy_joint_action(net, state, instance);
    action[i] = (*greedy)[i];
    if (stats) ++stats->greedy_moves;
  }
  return action;
}

// ---------------------------------------------------------------- learning

Eigen::MatrixXd batch_inputs(std::span<const Transition> batch, bool next_state, int cell_count) {
  if (batch.empty()) throw ValidationError("empty batch");
  const auto& first = next_state ? batch.front().next_state : batch.front().state;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(first.values.size()), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    x.col(static_cast<Eigen::Index>(b)) =
        normalize(next_state ? batch[b].next_state : batch[b].state, cell_count);
  }
  return x;
}

Eigen::MatrixXd td_targets(std::span<const Transition> batch, const QNetwork& target_net, double gamma,
                           int cell_count, double reward_scale) {
  const ForwardCache next = forward_batch(target_net, batch_inputs(batch, true, cell_count));
  const Eigen::MatrixXd& q_next = next.output();
  const Eigen::Index heads = q_next.rows() / kNumMoves;
  Eigen::MatrixXd y(heads, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const double r = reward_scale * batch[b].reward;
      y(h, col) = batch[b].terminal ? r : r + gamma * q_next.block(h * kNumMoves, col, kNumMoves, 1).maxCoeff();
    }
  }
  return y;
}

MaskedLoss masked_td_loss(const Eigen::MatrixXd& q, std::span<const Transition> batch, const Eigen::MatrixXd& targets) {
  const Eigen::Index heads = targets.rows();
  const double denom = static_cast<double>(heads) * static_cast<double>(batch.size());
  MaskedLoss out;
  out.grad_output = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto col = static_cast<Eigen::Index>(b);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Eigen::Index slot = h * kNumMoves + move_index(batch[b].action[static_cast<std::size_t>(h)]);
      const double diff = q(slot, col) - targets(h, col);
      out.loss += diff * diff;
      out.grad_output(slot, col) = 2.0 * diff / denom;
    }
  }
  out.loss /= denom;
  return out;
}

double train_step(QNetwork& net, const QNetwork& target_net, AdamState& adam, std::span<const Transition> batch,
                   const TrainStepParams& params) {
  const Eigen::MatrixXd targets = td_targets(batch, target_net, params.gamma, params.cell_count, params.reward_scale);
  const ForwardCache cache = forward_batch(net, batch_inputs(batch, false, params.cell_count));
  MaskedLoss loss = masked_td_loss(cache.output(), batch, targets);
  if (!std::isfinite(loss.loss)) throw NumericalError("non-finite TD loss");
  Gradients grads = backward_batch(net, cache, loss.grad_output);
  if (!all_finite(grads)) throw NumericalError("non-finite gradient");
  if (params.grad_clip > 0.0) {
    const double norm = std::sqrt(squared_norm(grads));
    if (norm > params.grad_clip) {
      const double scale = params.grad_clip / norm;
      for (auto& g : grads) {
        g.weights *= scale;
        g.bias *= scale;
      }
    }
  }
  adam_step(net, grads, adam);
  return loss.loss;
}

// ---------------------------------------------------------------- metrics

std::string metrics_csv_header() {
  return "episode,problem_id,steps,reward_sum,mean_loss,epsilon,heuristic_p,success";
}

std::string metrics_csv_row(const EpisodeRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%.6f,%.9g,%.6f,%.6f,%d", r.episode, r.problem_id, r.steps, r.reward_sum,
                r.mean_loss, r.epsilon, r.heuristic_p, r.success ? 1 : 0);
  return buf;
}

void write_metrics_csv(std::ostream& out, std::span<const EpisodeRecord> records) {
  out << metrics_csv_header() << '\n';
  for (const auto& r : records) out << metrics_csv_row(r) << '\n';
}

// ---------------------------------------------------------------- trainer

DqnTrainer::DqnTrainer(TrainerConfig config)
    : DqnTrainer(config, init_network(derive_seed(config.master_seed, kNetStream), config.layer_sizes())) {}

DqnTrainer::DqnTrainer(TrainerConfig config, QNetwork initial)
    : config_(std::move(config)),
      net_(std::move(initial)),
      target_(sync_target(net_)),
      adam_(AdamState::for_network(net_, config_.adam)),
      memory_(config_.replay_capacity),
      explore_rng_(derive_seed(config_.master_seed, kExploreStream)),
      replay_rng_(derive_seed(config_.master_seed, kReplayStream)) {
  config_.validate();
  if (net_.layer_sizes() != config_.layer_sizes()) throw ValidationError("shape mismatch: network vs trainer config");
}

EpisodeRecord DqnTrainer::run_episode(const ProblemInstance& instance, int episode_index, int problem_id) {
  EpisodeRecord record;
  record.episode = episode_index;
  record.problem_id = problem_id;
  record.epsilon = anneal(config_.epsilon, episode_index);
  record.heuristic_p = anneal(config_.heuristic, episode_index);

  const TrainStepParams params{config_.gamma, instance.cell_count(), config_.grad_clip, config_.reward_scale};
  const std::size_t learn_start = std::max(config_.learn_start, config_.batch_size);

  EnvState state = reset(instance);
  double loss_sum = 0.0;
  int loss_count = 0;
  while (!is_terminal(state, config_.max_steps)) {
    StateVec before = encode_state(state, instance);
    JointAction action =
        select_joint_action(net_, state, instance, record.epsilon, record.heuristic_p, explore_rng_, &stats_);
    StepResult result = step(state, action, instance, config_.max_steps, config_.reward_metric);
    record.reward_sum += result.reward;

    // Hitting the step limit is a truncation, not a terminal state.
    memory_.push(Transition{std::move(before), std::move(action), result.reward, encode_state(result.state, instance),
                            result.state.all_visited()});
    state = std::move(result.state);

    for (int u = 0; u < config_.updates_per_step && memory_.size() >= learn_start; ++u) {
      const auto batch = memory_.sample(config_.batch_size, replay_rng_);
      try {
        loss_sum += train_step(net_, target_, adam_, batch, params);
      } catch (const NumericalError& e) {
        throw TrainingAborted(std::string(e.what()) + " at episode " + std::to_string(episode_index), checkpoint());
      }
      ++loss_count;
      if (++train_steps_ % static_cast<std::uint64_t>(config_.target_sync_interval) == 0) target_ = sync_target(net_);
    }
  }
  record.steps = state.step_count;
  record.mean_loss = loss_count > 0 ? loss_sum / loss_count : 0.0;
  record.success = state.all_visited();
  return record;
}

Checkpoint DqnTrainer::checkpoint() const {
  Checkpoint cp;
  cp.net = net_;
  cp.adam = adam_;
  cp.metadata.seed = config_.master_seed;
  cp.metadata.rng_algorithm = Rng::kAlgorithm;
  cp.metadata.config_hash = config_hash(config_);
  cp.metadata.extra = {{"train_steps", train_steps_}, {"config", trainer_config_to_json(config_)}};
  return cp;
}

std::vector<ProblemInstance> training_problems(const TrainerConfig& config) {
  std::vector<ProblemInstance> problems;
  for (int p = 0; p < config.problems; ++p) {
    GeneratorConfig g = config.environment;
    g.seed = training_instance_seed(config.master_seed, p);
    ProblemInstance inst = generate(g);
    inst.name = "train-" + std::to_string(p);
    problems.push_back(std::move(inst));
  }
  return problems;
}

TrainingResult run_schedule(const TrainerConfig& config, const std::function<void(const EpisodeRecord&)>& on_episode) {
  config.validate();
  TrainingResult result;
  result.problems = training_problems(config);
  DqnTrainer trainer(config);
  int episode = 0;
  for (int p = 0; p < config.problems; ++p) {
    for (int e = 0; e < config.episodes_per_problem; ++e, ++episode) {
      EpisodeRecord r = trainer.run_episode(result.problems[static_cast<std::size_t>(p)], episode, p);
      if (on_episode) on_episode(r);
      result.records.push_back(r);
    }
  }
  result.checkpoint = trainer.checkpoint();
  result.stats = trainer.stats();
  result.train_steps = trainer.train_steps();
  return result;
}

QNetwork fine_tune(const QNetwork& net, const ProblemInstance& instance, const TrainerConfig& config, int episodes) {
  TrainerConfig tuned = config;
  tuned.epsilon = {config.epsilon.end, config.epsilon.end, 1};
  tuned.heuristic = {config.heuristic.end, config.heuristic.end, 1};
  DqnTrainer trainer(tuned, net);
  for (int e = 0; e < episodes; ++e) trainer.run_episode(instance, e, 0);
  return trainer.network();
}

}  // namespace gridroute
