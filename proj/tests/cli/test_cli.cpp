#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridroute/cli/dispatch.hpp"
#include "gridroute/cli/render.hpp"
#include "gridroute/grid_env.hpp"
#include "gridroute/problem_gen.hpp"

namespace fs = std::filesystem;

namespace gridroute::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gridroute_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

  fs::path dir_;
};

const char* kTinyConfig = R"({"trainer": {"hidden_layers": [16, 16], "problems": 2, "episodes_per_problem": 3,
                              "learn_start": 32, "target_sync_interval": 10}, "eval_instances": 4})";

TEST_F(CliTest, GenSolveRolloutRender) {
  Outcome g = run({"gen", "--count", "2", "--out", path("inst")});
  ASSERT_EQ(g.code, 0) << g.err;
  ASSERT_TRUE(fs::exists(path("inst/train-0.json")));

  Outcome s = run({"solve", "--instance", path("inst/train-0.json")});
  ASSERT_EQ(s.code, 0) << s.err;
  const auto sol = nlohmann::json::parse(s.out);
  EXPECT_GT(sol.at("total_distance").get<int>(), 0);

  Outcome r = run({"rollout", "--instance", path("inst/train-0.json"), "--policy", "greedy-landmark", "--seed", "3",
               "--out", path("t.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const EpisodeTrace t = parse_trace(slurp(path("t.json")));
  EXPECT_GE(t.total_distance, sol.at("total_distance").get<int>());

  Outcome f = run({"render", "--trace", path("t.json"), "--mode", "frames"});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_NE(f.out.find("legend:"), std::string::npos);
  Outcome m = run({"render", "--trace", path("t.json")});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_NE(m.out.find("total distance: " + std::to_string(t.total_distance)), std::string::npos);
}

TEST_F(CliTest, EvalPartitionAndTrainDeterminism) {
  write("c.json", kTinyConfig);
  Outcome a = run({"train", "--config", path("c.json"), "--seed", "42", "--out", path("a")});
  ASSERT_EQ(a.code, 0) << a.err;
  Outcome b = run({"train", "--config", path("c.json"), "--seed", "42", "--out", path("b")});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a/metrics.csv")), slurp(path("b/metrics.csv")));
  EXPECT_EQ(slurp(path("a/checkpoint.json")), slurp(path("b/checkpoint.json")));

  Outcome e = run({"eval", "--config", path("c.json"), "--checkpoint", path("a/checkpoint.json"), "--out", path("e")});
  ASSERT_EQ(e.code, 0) << e.err;
  const auto agg = nlohmann::json::parse(e.out);
  EXPECT_EQ(agg.at("instances").get<int>(), 4);
  EXPECT_EQ(agg.at("lower_bound_violations").get<int>(), 0);
  EXPECT_TRUE(fs::exists(path("e/report-network.csv")));

  Outcome rnd = run({"eval", "--config", path("c.json"), "--policy", "random", "--out", path("e")});
  EXPECT_EQ(rnd.code, 0) << rnd.err;
}

TEST_F(CliTest, UsageErrors) {
  Outcome unknown = run({"solve", "--instance", "x.json", "--bogus"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_EQ(unknown.err.rfind("error: usage: ", 0), 0u) << unknown.err;
  EXPECT_NE(unknown.err.find("Usage:"), std::string::npos);
  EXPECT_EQ(run({"fly"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"render", "--trace", "t.json", "--mode", "movie"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, ValidationErrors) {
  Outcome missing = run({"solve", "--instance", path("missing.json")});
  EXPECT_EQ(missing.code, 2);
  EXPECT_EQ(missing.err.rfind("error: validation: ", 0), 0u);
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);

  write("bad.json", R"({"trainer": {"gamma": 0.9}, "colour": "red"})");
  EXPECT_EQ(run({"train", "--config", path("bad.json"), "--out", path("o")}).code, 2);
  write("broken.json", "{ not json");
  EXPECT_EQ(run({"train", "--config", path("broken.json"), "--out", path("o")}).code, 2);

  ProblemInstance p = generate(GeneratorConfig{});
  nlohmann::json doc = instance_to_json(p);
  doc["landmarks"][0] = 49;
  write("oob.json", doc.dump());
  Outcome oob = run({"solve", "--instance", path("oob.json")});
  EXPECT_EQ(oob.code, 2);
  EXPECT_NE(oob.err.find("cell out of range"), std::string::npos);

  write("c.json", kTinyConfig);
  ASSERT_EQ(run({"gen", "--count", "1", "--out", path("inst")}).code, 0);
  EXPECT_EQ(run({"rollout", "--instance", path("inst/train-0.json")}).code, 2);  // network without checkpoint
}

TEST_F(CliTest, NumericalAbort) {
  write("hot.json", R"({"trainer": {"hidden_layers": [16, 16], "problems": 2, "episodes_per_problem": 3,
                                    "learn_start": 32, "learning_rate": 1e100}})");
  Outcome r = run({"train", "--config", path("hot.json"), "--out", path("o")});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: numerical: ", 0), 0u);
  EXPECT_TRUE(fs::exists(path("o/checkpoint.aborted.json")));
  EXPECT_TRUE(fs::exists(path("o/metrics.csv")));
}

EpisodeTrace two_step_trace() {
  ProblemInstance p;
  p.walls = defaults::kWalls;
  p.landmarks = {7 * 3 + 4, 7 * 0 + 0};
  EpisodeTrace t;
  t.instance = p;
  t.instance_id = "hand";
  t.policy = "manual";
  EnvState s = reset(p);
  for (const JointAction& a : {JointAction{Move::Right, Move::Up, Move::Left},
                               JointAction{Move::Up, Move::Up, Move::Down}}) {
    const StepResult r = step(s, a, p, 50);
    t.steps.push_back({a, r.state.agent_cells, r.reward, r.state.visited});
    s = r.state;
  }
  for (Cell c : s.agent_cells) t.tails.push_back(tail_return_route(c, p));
  t.termination = Termination::StepLimit;
  t.total_distance = total_distance(t);
  return t;
}

TEST(Render, ResetFrameStacksAgentsOnDepot) {
  const std::string text = render_trace(two_step_trace(), RenderMode::Frames);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_NE(line.find("highest index shown"), std::string::npos);
  std::getline(in, line);
  EXPECT_EQ(line, "step 0 (reset)");
  std::vector<std::string> grid(7);
  for (auto& row : grid) std::getline(in, row);
  EXPECT_EQ(grid[3], "  .#.2F#.");
  EXPECT_EQ(grid[0], "  F......");
}

TEST(Render, VisitedLandmarkStaysLowercase) {
  const EpisodeTrace t = two_step_trace();
  ASSERT_TRUE(t.steps[0].visited[0]);
  const std::string text = render_trace(t, RenderMode::Frames);
  // Agent 0 visits (3,4) in step 1 and has moved on by step 2.
  const auto step2 = text.find("step 2");
  ASSERT_NE(step2, std::string::npos);
  std::istringstream in(text.substr(step2));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> grid(7);
  for (auto& row : grid) std::getline(in, row);
  EXPECT_EQ(grid[3].substr(2), ".#.Df#.");
  EXPECT_EQ(grid[0].substr(2, 1), "F");
}

TEST(Render, SummaryListsStepMovesThenTails) {
  const EpisodeTrace t = two_step_trace();
  const std::string text = render_trace(t, RenderMode::Summary);
  EXPECT_NE(text.find("moves:\n  agent 0: RU\n  agent 1: UU\n  agent 2: LD\ntails:\n"), std::string::npos) << text;
  EXPECT_NE(text.find("total distance: " + std::to_string(t.total_distance)), std::string::npos);
}

TEST_F(CliTest, RenderIsReadOnly) {
  write("t.json", serialize_trace(two_step_trace()));
  const auto before = slurp(path("t.json"));
  const auto stamp = fs::last_write_time(path("t.json"));
  ASSERT_EQ(run({"render", "--trace", path("t.json"), "--mode", "frames"}).code, 0);
  ASSERT_EQ(run({"render", "--trace", path("t.json")}).code, 0);
  EXPECT_EQ(slurp(path("t.json")), before);
  EXPECT_EQ(fs::last_write_time(path("t.json")), stamp);
  write("junk.json", "{\"steps\": 3}");
  EXPECT_EQ(run({"render", "--trace", path("junk.json")}).code, 2);
}

TEST(RouteMoves, Letters) {
  EXPECT_EQ(route_moves({24, 23, 16, 17, 24}, 7), "LURD");
  EXPECT_EQ(route_moves({24}, 7), "");
  EXPECT_THROW(route_moves({24, 26}, 7), ValidationError);
}

}  // namespace
}  // namespace gridroute::cli
