// Command-line front end: compile, eval, train, report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "taskspec/ars.hpp"
#include "taskspec/augmented.hpp"
#include "taskspec/bench.hpp"
#include "taskspec/config.hpp"
#include "taskspec/monitor.hpp"
#include "taskspec/policy.hpp"
#include "taskspec/semantics.hpp"
#include "taskspec/spec.hpp"

namespace fs = std::filesystem;
using namespace taskspec;

namespace {

// Exit codes.
constexpr int kUsageError = 2;
constexpr int kInputError = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Config load_config(const std::string& path) {
  return path.empty() ? Config{} : Config::load(path);
}

void reject_unused(const Config& config) {
  const auto unused = config.unused_keys();
  if (unused.empty()) return;
  std::string keys;
  for (const auto& k : unused) keys += (keys.empty() ? "" : ", ") + k;
  throw ConfigError(fmt::format("unknown config keys: {}", keys));
}

Spec parse_file(const std::string& path, const Environment& env) {
  const std::string text = read_file(path);
  try {
    return parse_spec(text, env.predicates());
  } catch (const ParseError& e) {
    throw InputError(format_diagnostic(path, e));
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(fmt::format("'{}' is not a number", item));
    }
  }
  return out;
}

void print_monitor(const TaskMonitor& m, const ShapingConstants& shaping) {
  fmt::print("states: {}  registers: {}  transitions: {}\n", m.num_states, m.num_registers(),
             m.transitions.size());
  for (std::size_t q = 0; q < m.num_states; ++q) {
    fmt::print("  q{}{}{} depth {}", q, q == m.initial_state ? " (initial)" : "",
               m.is_final[q] ? " (final)" : "", shaping.depths.depth[q]);
    if (m.reward[q]) fmt::print("  rho = {}", to_string(*m.reward[q], m));
    fmt::print("\n");
  }
  for (const auto& t : m.transitions) {
    fmt::print("  #{} q{} -> q{} if {}", t.id, t.source, t.target, to_string(t.guard, m));
    for (std::size_t r = 0; r < t.update.assign.size(); ++r) {
      if (t.update.assign[r]) {
        fmt::print("; {} := {}", m.register_names[r], to_string(*t.update.assign[r], m));
      }
    }
    fmt::print("\n");
  }
  fmt::print("C_l = {}  C_u = {}  D = {}\n", shaping.c_lower, shaping.c_upper,
             shaping.depths.max_depth);
}

int cmd_compile(const std::string& spec_file, const std::string& env_name,
                const std::string& emit, const std::string& config_path) {
  const Config config = load_config(config_path);
  auto env = make_environment(env_name, config);
  const Spec spec = parse_file(spec_file, *env);
  const TaskMonitor monitor = compile(spec, compile_options_from(config));
  const auto shaping =
      shaping_constants(monitor, env->reachable_box(), shaping_overrides_from(config));
  reject_unused(config);
  const auto violations = validate_monitor(monitor);
  if (emit == "dot") {
    std::cout << to_dot(monitor);
  } else {
    fmt::print("spec: {}\n", print_spec(spec));
    print_monitor(monitor, shaping);
    fmt::print("fingerprint: {:016x}\n", fingerprint(monitor));
  }
  for (const auto& v : violations) {
    fmt::print(stderr, "invalid monitor: {}: {}\n", to_string(v.kind), v.message);
  }
  return violations.empty() ? 0 : 1;
}

int cmd_eval(const std::string& spec_file, const std::string& trace_file,
             const std::string& env_name) {
  auto env = make_environment(env_name);
  const Spec spec = parse_file(spec_file, *env);
  std::ifstream in(trace_file);
  if (!in) throw InputError(fmt::format("cannot read '{}'", trace_file));
  Rollout rollout;
  try {
    rollout = read_trace(in, env->state_dim());
  } catch (const std::runtime_error& e) {
    throw InputError(fmt::format("{}: {}", trace_file, e.what()));
  }
  const bool sat = eval_bool(spec, rollout);
  fmt::print("length: {}\n", rollout.length());
  fmt::print("satisfied: {}\n", sat ? "true" : "false");
  try {
    fmt::print("robustness: {}\n", eval_quant(spec, rollout));
  } catch (const UndefinedRobustness&) {
    fmt::print("robustness: undefined\n");
  }
  return sat ? 0 : 1;
}

struct TrainArgs {
  std::string target;
  std::string mode = "shaped";
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::string out;
  std::string env;
  std::string config;
  std::string checkpoint;
  std::string trace;
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  const Config config = load_config(args.config);
  std::string label;
  std::string env_name = args.env.empty() ? "point_robot" : args.env;
  std::string spec_text;
  std::size_t budget = args.budget;
  ArsConfig ars;
  bool known = false;
  for (const auto& e : benchmark_suite()) known = known || e.name == args.target;
  if (known) {
    const auto& entry = find_benchmark(args.target);
    label = entry.name;
    env_name = args.env.empty() ? entry.env : args.env;
    spec_text = entry.spec;
    if (budget == 0) budget = entry.budget;
  } else if (fs::exists(args.target)) {
    label = fs::path(args.target).stem().string();
    spec_text = read_file(args.target);
    if (budget == 0) budget = 200000;
  } else {
    find_benchmark(args.target);  // throws with the list of names
  }
  const Problem problem = [&] {
    try {
      return make_problem(env_name, spec_text, config);
    } catch (const ParseError& e) {
      throw InputError(format_diagnostic(known ? label : args.target, e));
    }
  }();
  ars = ars_config_from(config, ars);
  reject_unused(config);

  RunOptions options;
  options.mode = parse_reward_mode(args.mode);
  options.seed = args.seed;
  options.budget = budget;
  options.ars = ars;
  options.out_dir = args.out.empty() ? default_output_dir() : fs::path(args.out);
  if (!args.quiet) {
    options.progress = [](const CurvePoint& p) {
      fmt::print(stderr, "iter {:>6}  samples {:>8}  satisfaction {:.2f}  reward {:.4f}\n",
                 p.iteration, p.samples, p.satisfaction, p.mean_reward);
    };
  }
  const RunResult result = run_benchmark(label, problem, options);
  const auto& stats = result.train.stats;
  fmt::print("benchmark: {}\nmode: {}\nseed: {}\nsamples: {}\n", label, args.mode, args.seed,
             stats.samples);
  fmt::print("final satisfaction: {:.2f} over {} rollouts\n", result.final_satisfaction,
             ars.eval_rollouts);
  fmt::print("agreement violations: {}\n", stats.agreement_violations);
  if (options.mode == RewardMode::kShaped) {
    fmt::print("max |alpha|: {} (C_u = {}), bound violations: {}\n", stats.max_abs_alpha,
               problem.shaping.c_upper, stats.alpha_bound_violations);
  }
  if (stats.lower_bound_violations > 0) {
    fmt::print(stderr, "warning: {} final rewards at or below C_l = {}\n",
               stats.lower_bound_violations, problem.shaping.c_lower);
  }
  if (result.csv_path) fmt::print("curve: {}\n", result.csv_path->string());
  if (!args.checkpoint.empty()) {
    std::ofstream out(args.checkpoint);
    if (!out) throw InputError(fmt::format("cannot write '{}'", args.checkpoint));
    result.train.policy.save(out);
    fmt::print("checkpoint: {}\n", args.checkpoint);
  }
  if (!args.trace.empty()) {
    std::ofstream out(args.trace);
    if (!out) throw InputError(fmt::format("cannot write '{}'", args.trace));
    Rng rng(derive_seed(args.seed, 99));
    ModulePolicy policy(result.train.policy);
    write_trace(out, run_episode(*problem.env, problem.monitor, policy, rng));
    fmt::print("trace: {}\n", args.trace);
  }
  return 0;
}

struct ReportArgs {
  std::string thresholds = "0.3,0.5,0.7,0.9";
  std::string seeds = "0,1,2";
  std::string out;
  std::string config;
  double budget_scale = 1.0;
  bool trimmed = false;
};

int cmd_report(const ReportArgs& args) {
  const auto thresholds = parse_list(args.thresholds);
  std::vector<std::uint64_t> seeds;
  for (double s : parse_list(args.seeds)) seeds.push_back(static_cast<std::uint64_t>(s));
  const Config config = load_config(args.config);
  const fs::path dir = args.out.empty() ? default_output_dir() : fs::path(args.out);
  const ArsConfig ars = ars_config_from(config);

  std::vector<std::pair<std::string, std::vector<std::vector<CurvePoint>>>> curves;
  for (const auto& name : complexity_benchmarks()) {
    const auto& entry = find_benchmark(name);
    std::vector<std::vector<CurvePoint>> runs;
    for (auto seed : seeds) {
      const fs::path csv = dir / csv_filename(name, RewardMode::kShaped, seed);
      if (fs::exists(csv)) {
        std::ifstream in(csv);
        runs.push_back(read_curve_csv(in));
        fmt::print(stderr, "{}: reusing {}\n", name, csv.string());
        continue;
      }
      fmt::print(stderr, "{}: training seed {}\n", name, seed);
      const Problem problem = make_problem(entry.env, entry.spec, config);
      RunOptions options;
      options.seed = seed;
      options.budget = static_cast<std::size_t>(static_cast<double>(entry.budget) *
                                                args.budget_scale);
      options.ars = ars;
      options.out_dir = dir;
      runs.push_back(run_benchmark(name, problem, options).train.curve);
    }
    curves.emplace_back(name, std::move(runs));
  }
  reject_unused(config);
  const auto aggregation = args.trimmed ? Aggregation::kTrimmed : Aggregation::kUntrimmed;
  fmt::print("samples to reach satisfaction >= tau ({}, {} seeds)\n",
             args.trimmed ? "trimmed: fastest and slowest run dropped" : "untrimmed",
             seeds.size());
  std::cout << format_complexity_table(sample_complexity(curves, thresholds, aggregation),
                                       thresholds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task specifications, monitors and ARS training"};
  app.require_subcommand(1);

  std::string spec_file;
  std::string env_name = "point_robot";
  std::string emit = "text";
  std::string config_path;
  auto* compile_cmd = app.add_subcommand("compile", "Compile a spec file to a task monitor");
  compile_cmd->add_option("spec-file", spec_file, "Specification file")->required();
  compile_cmd->add_option("--emit", emit, "Output format")
      ->check(CLI::IsMember({"text", "dot"}));
  compile_cmd->add_option("--env", env_name, "Environment providing the predicates");
  compile_cmd->add_option("--config", config_path, "Flat key = value config file");

  std::string trace_file;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a spec on a rollout trace");
  eval_cmd->add_option("spec-file", spec_file, "Specification file")->required();
  eval_cmd->add_option("trace-file", trace_file, "Tab-separated trace")->required();
  eval_cmd->add_option("--env", env_name, "Environment providing the predicates");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a policy with ARS");
  train_cmd->add_option("target", train_args.target, "Benchmark name or spec file")
      ->required();
  train_cmd->add_option("--mode", train_args.mode, "Reward mode")
      ->check(CLI::IsMember({"shaped", "unshaped", "tltl"}));
  train_cmd->add_option("--seed", train_args.seed, "Master seed");
  train_cmd->add_option("--budget", train_args.budget, "Sample rollouts");
  train_cmd->add_option("--out", train_args.out,
                        fmt::format("Output directory (default ${} or results)",
                                    kOutputDirVariable));
  train_cmd->add_option("--env", train_args.env, "Environment for a spec file");
  train_cmd->add_option("--config", train_args.config, "Flat key = value config file");
  train_cmd->add_option("--checkpoint", train_args.checkpoint, "Write the trained policy");
  train_cmd->add_option("--trace", train_args.trace, "Write one rollout of the trained policy");
  train_cmd->add_flag("--quiet", train_args.quiet, "No progress output");

  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Sample-complexity table");
  report_cmd->add_option("--thresholds", report_args.thresholds, "Comma-separated taus");
  report_cmd->add_option("--seeds", report_args.seeds, "Comma-separated seeds");
  report_cmd->add_option("--out", report_args.out, "Directory with or for curve CSVs");
  report_cmd->add_option("--config", report_args.config, "Flat key = value config file");
  report_cmd->add_option("--budget-scale", report_args.budget_scale,
                         "Multiplier on each benchmark's budget");
  report_cmd->add_flag("--trimmed", report_args.trimmed,
                       "Drop the fastest and slowest run per cell");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compile_cmd) return cmd_compile(spec_file, env_name, emit, config_path);
    if (*eval_cmd) return cmd_eval(spec_file, trace_file, env_name);
    if (*train_cmd) return cmd_train(train_args);
    if (*report_cmd) return cmd_report(report_args);
  } catch (const InputError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return kInputError;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return kUsageError;
}
