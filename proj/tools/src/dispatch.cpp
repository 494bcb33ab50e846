#include "gridroute/cli/dispatch.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridroute/checkpoint.hpp"
#include "gridroute/cli/render.hpp"
#include "gridroute/cli/run_config.hpp"
#include "gridroute/dqn_trainer.hpp"
#include "gridroute/error.hpp"
#include "gridroute/eval_harness.hpp"
#include "gridroute/oracle_solver.hpp"
#include "gridroute/problem_gen.hpp"
#include "gridroute/state_codec.hpp"

namespace fs = std::filesystem;

namespace gridroute::cli {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

// Writes to `path` when given, otherwise to the command's primary stream.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

Policy make_policy(const std::string& name, const std::optional<Checkpoint>& ck) {
  if (name == "network") {
    if (!ck) throw ValidationError("policy 'network' needs --checkpoint");
    return Policy::network(ck->net);
  }
  if (name == "random") return Policy::random();
  if (name == "greedy-landmark") return Policy::greedy_landmark();
  throw ValidationError("unknown policy '" + name + "'");
}

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string instance_path;
  std::string checkpoint_path;
  std::string trace_path;
  std::string policy = "network";
  std::string mode;
  std::string partition = "train";
  int count = 0;
  std::optional<int> max_steps;
  std::optional<int> finetune;
};

RunConfig load_config(const Options& o) { return o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path); }

// Hidden widths are whatever the checkpoint says; only the ends must fit.
std::optional<Checkpoint> load_optional_checkpoint(const Options& o, int num_agents, int num_landmarks) {
  if (o.checkpoint_path.empty()) return std::nullopt;
  Checkpoint ck = read_checkpoint_file(o.checkpoint_path);
  if (ck.net.input_size() != state_size(num_agents, num_landmarks) || ck.net.output_size() != q_size(num_agents)) {
    throw ValidationError("shape mismatch: checkpoint does not fit " + std::to_string(num_agents) + " agents and " +
                          std::to_string(num_landmarks) + " landmarks");
  }
  return ck;
}

int cmd_gen(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  GeneratorConfig env = cfg.trainer.environment;
  const std::uint64_t seed = o.seed.value_or(o.partition == "eval" ? cfg.eval_seed : cfg.trainer.master_seed);
  const int count = o.count > 0 ? o.count : (o.partition == "eval" ? cfg.eval_instances : cfg.trainer.problems);
  const fs::path dir = o.out.empty() ? fs::path(cfg.out_dir) / "instances" : fs::path(o.out);

  std::vector<ProblemInstance> instances;
  if (o.partition == "train") {
    TrainerConfig t = cfg.trainer;
    t.master_seed = seed;
    t.problems = count;
    instances = training_problems(t);
  } else if (o.partition == "eval") {
    TrainerConfig t = cfg.trainer;
    const auto exclude = training_problems(t);
    for (auto& n : evaluation_instances(env, seed, count, exclude)) instances.push_back(std::move(n.instance));
  } else {
    throw ValidationError("unknown partition '" + o.partition + "' (expected train or eval)");
  }
  for (const auto& p : instances) {
    const fs::path file = dir / (p.name.value_or("instance") + ".json");
    write_file(file, serialize_instance(p));
    out << file.string() << '\n';
  }
  return kOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  if (o.seed) cfg.trainer.master_seed = *o.seed;
  cfg.trainer.validate();
  const fs::path dir = o.out.empty() ? fs::path(cfg.out_dir) : fs::path(o.out);
  fs::create_directories(dir);

  // Rows are streamed so a numerical abort still leaves the metrics so far.
  std::ofstream metrics(dir / "metrics.csv", std::ios::binary);
  if (!metrics) throw ValidationError("cannot write '" + (dir / "metrics.csv").string() + "'");
  metrics << metrics_csv_header() << '\n';
  try {
    const TrainingResult result =
        run_schedule(cfg.trainer, [&](const EpisodeRecord& r) { metrics << metrics_csv_row(r) << '\n'; });
    metrics.close();
    write_checkpoint_file((dir / "checkpoint.json").string(), result.checkpoint);
    write_file(dir / "config.json", run_config_to_json(cfg).dump(2) + "\n");
    int successes = 0;
    for (const auto& r : result.records) successes += r.success;
    out << "episodes " << result.records.size() << " train_steps " << result.train_steps << " successes "
        << successes << " checkpoint " << (dir / "checkpoint.json").string() << '\n';
  } catch (const TrainingAborted& e) {
    metrics.close();
    write_checkpoint_file((dir / "checkpoint.aborted.json").string(), e.last_good());
    throw;
  }
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  RunConfig cfg = load_config(o);
  const GeneratorConfig& env = cfg.trainer.environment;
  const auto ck = load_optional_checkpoint(o, env.num_agents, env.num_landmarks);
  const Policy policy = make_policy(o.policy, ck);
  const std::uint64_t seed = o.seed.value_or(cfg.eval_seed);
  const int count = o.count > 0 ? o.count : cfg.eval_instances;
  const auto suite = evaluation_instances(cfg.trainer.environment, seed, count, training_problems(cfg.trainer));

  EvalConfig ec;
  ec.max_steps = o.max_steps.value_or(cfg.trainer.max_steps);
  ec.seed = seed;
  ec.finetune_episodes = o.finetune.value_or(cfg.finetune_episodes);
  ec.finetune = cfg.trainer;
  const SuiteReport report = evaluate_suite(policy, suite, ec);

  const fs::path dir = o.out.empty() ? fs::path(cfg.out_dir) : fs::path(o.out);
  write_file(dir / ("report-" + report.policy + ".csv"), report_csv(report));
  const std::string aggregates = report_aggregates_json(report).dump(2) + "\n";
  write_file(dir / ("aggregates-" + report.policy + ".json"), aggregates);
  out << aggregates;
  return kOk;
}

int cmd_solve(const Options& o, std::ostream& out) {
  const ProblemInstance p = parse_instance(read_file(o.instance_path));
  emit(o.out, solution_to_json(solve_exact(p)).dump(2) + "\n", out);
  return kOk;
}

int cmd_rollout(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const ProblemInstance p = parse_instance(read_file(o.instance_path));
  const auto ck = load_optional_checkpoint(o, p.num_agents, static_cast<int>(p.landmarks.size()));
  const Policy policy = make_policy(o.policy, ck);
  const EpisodeTrace t = rollout(policy, p, o.max_steps.value_or(cfg.trainer.max_steps), o.seed.value_or(0));
  emit(o.out, serialize_trace(t), out);
  return kOk;
}

int cmd_render(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const RenderMode mode = o.mode.empty() ? cfg.render_mode : parse_render_mode(o.mode);
  out << render_trace(parse_trace(read_file(o.trace_path)), mode);
  return kOk;
}

int fail(std::ostream& err, const char* kind, const std::string& message, int code) {
  std::string line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  err << "error: " << kind << ": " << line << '\n';
  return code;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-agent grid routing: generate problems, train the Q-network, evaluate, solve exactly, "
               "roll out and render traces.",
               "gridroute"};
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("gen", "write problem instance documents");
  gen->add_option("--config", o.config_path, "run config (JSON)");
  gen->add_option("--seed", o.seed, "base seed (defaults to the config's master or evaluation seed)");
  gen->add_option("--count", o.count, "number of instances")->check(CLI::PositiveNumber);
  gen->add_option("--partition", o.partition, "seed partition: train or eval")->check(CLI::IsMember({"train", "eval"}));
  gen->add_option("--out", o.out, "output directory");

  auto* train = app.add_subcommand("train", "run the training schedule; writes metrics.csv and checkpoint.json");
  train->add_option("--config", o.config_path, "run config (JSON)");
  train->add_option("--seed", o.seed, "master seed (overrides the config)");
  train->add_option("--out", o.out, "output directory");

  auto* eval = app.add_subcommand("eval", "evaluate a policy on fresh instances against the exact oracle");
  eval->add_option("--config", o.config_path, "run config (JSON)");
  eval->add_option("--checkpoint", o.checkpoint_path, "trained network (needed for --policy network)");
  eval->add_option("--policy", o.policy, "network, random or greedy-landmark")
      ->check(CLI::IsMember({"network", "random", "greedy-landmark"}));
  eval->add_option("--seed", o.seed, "evaluation seed (overrides the config)");
  eval->add_option("--count", o.count, "number of instances")->check(CLI::PositiveNumber);
  eval->add_option("--max-steps", o.max_steps, "episode step limit")->check(CLI::PositiveNumber);
  eval->add_option("--finetune", o.finetune, "per-instance fine-tuning episodes")->check(CLI::NonNegativeNumber);
  eval->add_option("--out", o.out, "output directory");

  auto* solve = app.add_subcommand("solve", "exact optimal routes for one instance");
  solve->add_option("--instance", o.instance_path, "instance document")->required();
  solve->add_option("--out", o.out, "solution file (stdout if omitted)");

  auto* roll = app.add_subcommand("rollout", "roll out one policy on one instance and write the trace");
  roll->add_option("--config", o.config_path, "run config (JSON)");
  roll->add_option("--instance", o.instance_path, "instance document")->required();
  roll->add_option("--checkpoint", o.checkpoint_path, "trained network (needed for --policy network)");
  roll->add_option("--policy", o.policy, "network, random or greedy-landmark")
      ->check(CLI::IsMember({"network", "random", "greedy-landmark"}));
  roll->add_option("--seed", o.seed, "rollout seed");
  roll->add_option("--max-steps", o.max_steps, "episode step limit")->check(CLI::PositiveNumber);
  roll->add_option("--out", o.out, "trace file (stdout if omitted)");

  auto* render = app.add_subcommand("render", "print a trace as ASCII frames or a move summary");
  render->add_option("--config", o.config_path, "run config (JSON)");
  render->add_option("--trace", o.trace_path, "trace document")->required();
  render->add_option("--mode", o.mode, "frames or summary")->check(CLI::IsMember({"frames", "summary"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const int code = fail(err, "usage", e.what(), kUsage);
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return code;
  }

  try {
    if (gen->parsed()) return cmd_gen(o, out);
    if (train->parsed()) return cmd_train(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (solve->parsed()) return cmd_solve(o, out);
    if (roll->parsed()) return cmd_rollout(o, out);
    return cmd_render(o, out);
  } catch (const ValidationError& e) {
    return fail(err, "validation", e.what(), kValidation);
  } catch (const NumericalError& e) {
    return fail(err, "numerical", e.what(), kNumerical);
  } catch (const fs::filesystem_error& e) {
    return fail(err, "validation", e.what(), kValidation);
  }
}

}  // namespace gridroute::cli
