#include <gtest/gtest.h>

#include <array>
#include <sstream>

#include "gridroute/dqn_trainer.hpp"
#include "gridroute/error.hpp"

namespace gridroute {
namespace {

Cell rc(int r, int c) { return 7 * r + c; }

ProblemInstance open_grid(std::vector<Cell> landmarks) {
  ProblemInstance p;
  p.landmarks = std::move(landmarks);
  return p;
}

Transition marker(double reward) {
  Transition t;
  t.reward = reward;
  return t;
}

Transition transition(const ProblemInstance& p, const EnvState& s, JointAction a, double reward, bool terminal) {
  const StepResult r = step(s, a, p, 50);
  return {encode_state(s, p), std::move(a), reward, encode_state(r.state, p), terminal, 0};
}

// Single linear layer with zero weights: every output equals its bias.
QNetwork constant_net(const std::vector<double>& outputs) {
  QNetwork net({13, 12});
  for (int i = 0; i < 12; ++i) net.layers()[0].bias[i] = outputs[static_cast<std::size_t>(i)];
  return net;
}

TEST(Replay, FifoEviction) {
  ReplayMemory m(3);
  for (int i = 0; i < 4; ++i) m.push(marker(i));
  ASSERT_EQ(m.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m[i].reward, static_cast<double>(i + 1));
    EXPECT_EQ(m[i].sequence, i + 1);
  }
}

TEST(Replay, SamplesComeFromStore) {
  ReplayMemory m(200);
  for (int i = 0; i < 100; ++i) m.push(marker(-i));
  Rng rng(5);
  for (const Transition& t : m.sample(32, rng)) {
    EXPECT_LE(t.reward, 0.0);
    EXPECT_GT(t.reward, -100.0);
    EXPECT_EQ(static_cast<double>(t.sequence), -t.reward);
  }
  EXPECT_THROW(ReplayMemory(10).sample(1, rng), ValidationError);
}

TEST(Replay, SamplingDeterministic) {
  ReplayMemory m(100);
  for (int i = 0; i < 100; ++i) m.push(marker(i));
  Rng a(11), b(11);
  const auto sa = m.sample(32, a), sb = m.sample(32, b);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(sa[i].sequence, sb[i].sequence);
}

TEST(Guided, Examples) {
  const auto p = open_grid({rc(3, 5)});
  const EnvState s = reset(p);
  EXPECT_EQ(guided_subaction(0, s, p), Move::Right);
  const auto q = open_grid({rc(1, 2)});
  EXPECT_EQ(guided_subaction(0, reset(q), q), Move::Up);
  EnvState done = reset(q);
  done.visited = {true};
  EXPECT_EQ(guided_subaction(0, done, q), std::nullopt);
}

TEST(Guided, BlockedAxisFallsBack) {
  ProblemInstance p = open_grid({rc(3, 0)});
  p.walls = defaults::kWalls;  // (3,1) is a wall
  EnvState s = reset(p);
  s.agent_cells[0] = rc(2, 1);
  EXPECT_EQ(guided_subaction(0, s, p), Move::Left);  // tie goes horizontal
  s.agent_cells[0] = rc(3, 2);
  EXPECT_EQ(guided_subaction(0, s, p), Move::Up);  // aligned and blocked: sidestep
  p.landmarks = {rc(4, 0)};
  p.walls = {rc(2, 0), rc(3, 1)};
  s.agent_cells[0] = rc(3, 0);
  EXPECT_EQ(guided_subaction(0, s, p), Move::Down);
  s.agent_cells[0] = rc(2, 1);
  p.landmarks = {rc(4, 0)};
  // Down into (3,1) and Left into (2,0) are both walls.
  EXPECT_EQ(guided_subaction(0, s, p), std::nullopt);
}

TEST(Select, GreedyWhenNoExploration) {
  const auto p = open_grid({3, 10, 17, 30, 41});
  const QNetwork net = init_network(3, {13, 16, 12});
  Rng rng(1);
  EnvState s = reset(p);
  s.agent_cells = {rc(1, 1), rc(5, 2), rc(4, 6)};
  EXPECT_EQ(select_joint_action(net, s, p, 0.0, 0.0, rng), greedy_joint_action(net, s, p));
}

TEST(Select, UniformUnderFullEpsilon) {
  const auto p = open_grid({3, 10, 17, 30, 41});
  const QNetwork net = init_network(3, {13, 16, 12});
  Rng rng(2);
  const EnvState s = reset(p);
  std::array<int, 4> counts{};
  const int draws = 10000;
  for (int i = 0; i < draws / 3 + 1; ++i) {
    for (Move m : select_joint_action(net, s, p, 1.0, 0.0, rng)) ++counts[static_cast<std::size_t>(move_index(m))];
  }
  const double total = counts[0] + counts[1] + counts[2] + counts[3];
  for (int c : counts) EXPECT_NEAR(c / total, 0.25, 0.03);
}

TEST(Select, FullHeuristicFollowsGuide) {
  const auto p = open_grid({rc(0, 5)});
  const QNetwork net = init_network(3, {13, 16, 12});
  Rng rng(3);
  EnvState s = reset(p);
  s.agent_cells = {rc(3, 3), rc(6, 5), rc(0, 0)};
  SelectionStats stats;
  const JointAction a = select_joint_action(net, s, p, 1.0, 1.0, rng, &stats);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a[static_cast<std::size_t>(i)], guided_subaction(i, s, p));
  EXPECT_EQ(stats.guided_moves, 3u);
  EXPECT_EQ(stats.random_moves, 0u);
}

TEST(Anneal, Endpoints) {
  const LinearSchedule s{1.0, 0.05, 300};
  EXPECT_DOUBLE_EQ(anneal(s, 0), 1.0);
  EXPECT_DOUBLE_EQ(anneal(s, 300), 0.05);
  EXPECT_DOUBLE_EQ(anneal(s, 150), 0.525);
  EXPECT_DOUBLE_EQ(anneal(s, 599), 0.05);
}

TEST(TdTargets, Examples) {
  const auto p = open_grid({3, 10, 17, 30, 41});
  const EnvState s = reset(p);
  const JointAction a{Move::Left, Move::Right, Move::Up};
  std::vector<double> q(12, -1.0);
  q[1] = 10.0;  // head 0 max
  q[6] = 10.0;  // head 1 max
  q[11] = 10.0;  // head 2 max
  const QNetwork target = constant_net(q);

  const std::vector<Transition> live{transition(p, s, a, -7.0, false)};
  const Eigen::MatrixXd y = td_targets(live, target, 0.95, 49);
  for (int h = 0; h < 3; ++h) EXPECT_NEAR(y(h, 0), 2.5, 1e-12);

  const std::vector<Transition> done{transition(p, s, a, 0.0, true)};
  EXPECT_TRUE(td_targets(done, target, 0.95, 49).isZero());

  const Eigen::MatrixXd y0 = td_targets(live, target, 0.0, 49);
  for (int h = 0; h < 3; ++h) EXPECT_EQ(y0(h, 0), -7.0);
}

TEST(Loss, MaskedGradient) {
  const auto p = open_grid({3, 10, 17, 30, 41});
  std::vector<Transition> batch;
  EnvState s = reset(p);
  Rng rng(4);
  for (int i = 0; i < 8; ++i) {
    JointAction a;
    for (int k = 0; k < 3; ++k) a.push_back(move_from_index(static_cast<int>(rng.uniform_index(4))));
    batch.push_back(transition(p, s, a, -3.0 - i, false));
    s = step(s, a, p, 50).state;
  }
  const QNetwork net = init_network(5, {13, 16, 12});
  const Eigen::MatrixXd q = forward_batch(net, batch_inputs(batch, false, 49)).output();
  const Eigen::MatrixXd y = td_targets(batch, net, 0.95, 49);
  const MaskedLoss loss = masked_td_loss(q, batch, y);
  for (Eigen::Index b = 0; b < loss.grad_output.cols(); ++b) {
    int nonzero = 0;
    for (Eigen::Index i = 0; i < 12; ++i) {
      if (loss.grad_output(i, b) != 0.0) {
        ++nonzero;
        const int head = static_cast<int>(i / 4);
        EXPECT_EQ(i % 4, move_index(batch[static_cast<std::size_t>(b)].action[static_cast<std::size_t>(head)]));
      }
    }
    EXPECT_LE(nonzero, 3);
  }
  // Exact targets: zero loss and zero gradient.
  Eigen::MatrixXd exact(3, 8);
  for (int b = 0; b < 8; ++b) {
    for (int h = 0; h < 3; ++h) exact(h, b) = q(h * 4 + move_index(batch[static_cast<std::size_t>(b)].action[static_cast<std::size_t>(h)]), b);
  }
  const MaskedLoss zero = masked_td_loss(q, batch, exact);
  EXPECT_EQ(zero.loss, 0.0);
  EXPECT_TRUE(zero.grad_output.isZero());
}

TEST(TrainStep, LossDecreasesOnFixedBatch) {
  const auto p = open_grid({3, 10, 17, 30, 41});
  std::vector<Transition> batch;
  Rng rng(6);
  EnvState s = reset(p);
  for (int i = 0; i < 32; ++i) {
    JointAction a;
    for (int k = 0; k < 3; ++k) a.push_back(move_from_index(static_cast<int>(rng.uniform_index(4))));
    const StepResult r = step(s, a, p, 50);
    batch.push_back(transition(p, s, a, r.reward, r.terminal));
    s = r.terminal ? reset(p) : r.state;
  }
  QNetwork net = init_network(8, {13, 64, 64, 12});
  const QNetwork target = sync_target(net);
  AdamState adam = AdamState::for_network(net);
  const TrainStepParams params;
  const double first = train_step(net, target, adam, batch, params);
  double last = first;
  for (int i = 0; i < 99; ++i) last = train_step(net, target, adam, batch, params);
  EXPECT_LT(last, 0.1 * first);
}

TEST(TrainStep, NonFiniteLeavesNetworkUntouched) {
  const auto p = open_grid({3, 10, 17, 30, 41});
  const EnvState s = reset(p);
  std::vector<Transition> batch{transition(p, s, {Move::Left, Move::Left, Move::Left}, std::nan(""), false)};
  QNetwork net = init_network(8, {13, 8, 12});
  const QNetwork before = net;
  AdamState adam = AdamState::for_network(net);
  EXPECT_THROW(train_step(net, before, adam, batch, {}), NumericalError);
  EXPECT_EQ(net, before);
}

TrainerConfig small_config() {
  TrainerConfig c;
  c.hidden_layers = {32, 32};
  c.problems = 3;
  c.episodes_per_problem = 4;
  c.learn_start = 64;
  c.target_sync_interval = 20;
  c.epsilon.anneal_episodes = 8;
  c.heuristic.anneal_episodes = 8;
  return c;
}

std::string csv(const TrainingResult& r) {
  std::ostringstream out;
  write_metrics_csv(out, r.records);
  return out.str();
}

TEST(Schedule, SmallRunShapeAndDeterminism) {
  const TrainerConfig c = small_config();
  const TrainingResult a = run_schedule(c);
  ASSERT_EQ(a.records.size(), 12u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].episode, static_cast<int>(i));
    EXPECT_EQ(a.records[i].problem_id, static_cast<int>(i / 4));
    EXPECT_LE(a.records[i].steps, 50);
  }
  EXPECT_GT(a.train_steps, 0u);
  EXPECT_EQ(csv(a), csv(run_schedule(c)));
  EXPECT_EQ(csv(a).substr(0, metrics_csv_header().size()), metrics_csv_header());
}

TEST(Schedule, HeuristicOffNeverConsultsGuide) {
  TrainerConfig c = small_config();
  c.heuristic = {0.0, 0.0, 1};
  const TrainingResult r = run_schedule(c);
  EXPECT_EQ(r.stats.guided_calls, 0u);
  EXPECT_EQ(r.stats.guided_moves, 0u);
}

TEST(Schedule, ProblemsAreSeparatedFromEvaluationSeeds) {
  const auto problems = training_problems(small_config());
  ASSERT_EQ(problems.size(), 3u);
  for (const auto& p : problems) EXPECT_NO_THROW(validate_instance(p));
}

TEST(Config, JsonRoundtripAndUnknownKeys) {
  TrainerConfig c = small_config();
  c.master_seed = 99;
  c.reward_metric = RewardMetric::Bfs;
  const auto doc = trainer_config_to_json(c);
  EXPECT_EQ(trainer_config_to_json(trainer_config_from_json(doc)), doc);
  EXPECT_EQ(config_hash(trainer_config_from_json(doc)), config_hash(c));
  auto bad = doc;
  bad["no_such_key"] = 1;
  EXPECT_THROW(trainer_config_from_json(bad), ValidationError);
  auto invalid = doc;
  invalid["gamma"] = 1.0;
  EXPECT_THROW(trainer_config_from_json(invalid), ValidationError);
}

TEST(Metrics, RowFormat) {
  EXPECT_EQ(metrics_csv_header(), "episode,problem_id,steps,reward_sum,mean_loss,epsilon,heuristic_p,success");
  EpisodeRecord r{3, 0, 12, -40.0, 0.5, 1.0, 0.5, true};
  EXPECT_EQ(metrics_csv_row(r), "3,0,12,-40.000000,0.5,1.000000,0.500000,1");
}

}  // namespace
}  // namespace gridroute
