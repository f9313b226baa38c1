#include "taskspec/bench.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "taskspec/envs.hpp"

namespace taskspec {

namespace {

constexpr const char* kAvoid = "avoid(4,6,4,6)";

std::string waypoints(std::initializer_list<const char*> points) {
  std::string out = "achieve (";
  bool first = true;
  for (const char* p : points) {
    if (!first) out += "; ";
    out += fmt::format("reach({})", p);
    first = false;
  }
  return out + ")";
}

}  // namespace

const std::vector<BenchmarkEntry>& benchmark_suite() {
  static const std::vector<BenchmarkEntry> suite = [] {
    std::vector<BenchmarkEntry> s;
    const std::string avoid = kAvoid;
    s.push_back({"phi1", "point_robot", "achieve reach(5,10) ensuring " + avoid, 200000, 0.9});
    s.push_back({"phi2", "point_robot",
                 "achieve reach(5,10) ensuring " + avoid + " and fuel_positive", 200000, 0.9});
    s.push_back({"phi3", "point_robot",
                 waypoints({"5,10", "5,0"}) + " ensuring " + avoid, 200000, 0.9});
    s.push_back({"phi4", "point_robot",
                 "(achieve reach(5,10) or achieve reach(10,0)); achieve reach(10,10) ensuring " +
                     avoid,
                 200000, 0.9});
    s.push_back({"phi5", "point_robot",
                 waypoints({"5,10", "5,0", "10,0"}) + " ensuring " + avoid, 500000, 0.8});
    s.push_back({"phi6", "point_robot",
                 waypoints({"5,10", "5,0", "10,0", "10,10"}) + " ensuring " + avoid, 1000000,
                 0.8});
    s.push_back({"phi7", "point_robot",
                 waypoints({"5,10", "5,0", "10,0", "10,10", "0,0"}) + " ensuring " + avoid,
                 1000000, 0.8});
    s.push_back({"cartpole", "cartpole", "achieve (reach(0.5); reach(0.0)) ensuring balance",
                 500000, 0.9});
    return s;
  }();
  return suite;
}

const BenchmarkEntry& find_benchmark(std::string_view name) {
  for (const auto& e : benchmark_suite()) {
    if (e.name == name) return e;
  }
  std::string names;
  for (const auto& e : benchmark_suite()) names += (names.empty() ? "" : ", ") + e.name;
  throw UnknownBenchmark(fmt::format("unknown benchmark '{}'; available: {}", name, names));
}

const std::vector<std::string>& complexity_benchmarks() {
  static const std::vector<std::string> names{"phi1", "phi3", "phi5", "phi6", "phi7"};
  return names;
}

std::unique_ptr<Environment> make_environment(const std::string& name, const Config& config) {
  if (name == "point_robot") {
    PointRobotParams p;
    p.noise_stddev = config.get_double("noise_stddev", p.noise_stddev);
    p.horizon = static_cast<int>(config.get_size("horizon", p.horizon));
    return std::make_unique<PointRobotEnv>(p);
  }
  if (name == "cartpole") {
    CartPoleParams p;
    p.horizon = static_cast<int>(config.get_size("horizon", p.horizon));
    return std::make_unique<CartPoleEnv>(p);
  }
  if (name == "grid") {
    GridParams p;
    p.horizon = static_cast<int>(config.get_size("horizon", p.horizon));
    return std::make_unique<GridEnv>(p);
  }
  throw std::invalid_argument(
      fmt::format("unknown environment '{}'; available: point_robot, cartpole, grid", name));
}

ArsConfig ars_config_from(const Config& config, ArsConfig base) {
  base.directions = config.get_size("directions", base.directions);
  base.top_directions = config.get_size("top_directions", base.top_directions);
  base.step_size = config.get_double("step_size", base.step_size);
  base.noise = config.get_double("perturbation_stddev", base.noise);
  base.rollouts_per_direction =
      config.get_size("rollouts_per_direction", base.rollouts_per_direction);
  base.eval_every = config.get_size("eval_every", base.eval_every);
  base.eval_rollouts = config.get_size("eval_rollouts", base.eval_rollouts);
  if (auto stop = config.get_optional_double("stop_at")) base.stop_at = *stop;
  base.threads = config.get_size("threads", base.threads);
  return base;
}

CompileOptions compile_options_from(const Config& config) {
  CompileOptions options;
  options.split_conjuncts = config.get_bool("split_conjuncts", options.split_conjuncts);
  return options;
}

ShapingOverrides shaping_overrides_from(const Config& config) {
  return {config.get_optional_double("c_lower"), config.get_optional_double("c_upper")};
}

Problem make_problem(const std::string& env_name, const std::string& spec_text,
                     const Config& config) {
  auto env = make_environment(env_name, config);
  Spec spec = parse_spec(spec_text, env->predicates());
  TaskMonitor monitor = compile(spec, compile_options_from(config));
  ShapingConstants shaping =
      shaping_constants(monitor, env->reachable_box(), shaping_overrides_from(config));
  return Problem{std::move(env), std::move(spec), std::move(monitor), std::move(shaping)};
}

std::string csv_filename(const std::string& label, RewardMode mode, std::uint64_t seed) {
  return fmt::format("{}_{}_seed{}.csv", label, to_string(mode), seed);
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve,
                     std::uint64_t seed) {
  out << "samples,satisfaction,mean_shaped_reward,iteration,seed\n";
  for (const auto& p : curve) {
    out << fmt::format("{},{},{},{},{}\n", p.samples, p.satisfaction, p.mean_reward,
                       p.iteration, seed);
  }
}

std::vector<CurvePoint> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("samples,satisfaction", 0) != 0) {
    throw std::runtime_error("curve CSV: missing header");
  }
  std::vector<CurvePoint> curve;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string f[5];
    for (auto& field : f) {
      if (!std::getline(fields, field, ',')) {
        throw std::runtime_error(fmt::format("curve CSV line {}: too few fields", line_no));
      }
    }
    try {
      curve.push_back({std::stoull(f[0]), std::stod(f[1]), std::stod(f[2]), std::stoull(f[3])});
    } catch (const std::exception&) {
      throw std::runtime_error(fmt::format("curve CSV line {}: malformed number", line_no));
    }
  }
  return curve;
}

RunResult run_benchmark(const std::string& label, const Problem& problem,
                        const RunOptions& options) {
  ArsConfig cfg = options.ars;
  cfg.seed = options.seed;
  cfg.iterations = options.budget / cfg.samples_per_iteration();
  RunResult result{train(problem.task(), cfg, options.mode, options.progress), std::nullopt,
                   0.0};
  if (!result.train.curve.empty()) {
    result.final_satisfaction = result.train.curve.back().satisfaction;
  }
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    const auto path = *options.out_dir / csv_filename(label, options.mode, options.seed);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    write_curve_csv(out, result.train.curve, options.seed);
    result.csv_path = path;
  }
  return result;
}

std::optional<std::size_t> samples_to_threshold(const std::vector<CurvePoint>& curve,
                                                double tau) {
  for (const auto& p : curve) {
    if (p.satisfaction >= tau) return p.samples;
  }
  return std::nullopt;
}

std::vector<ComplexityRow> sample_complexity(
    const std::vector<std::pair<std::string, std::vector<std::vector<CurvePoint>>>>& curves,
    const std::vector<double>& thresholds, Aggregation aggregation) {
  for (double tau : thresholds) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument(fmt::format("threshold {} is outside (0, 1)", tau));
    }
  }
  constexpr double kNever = std::numeric_limits<double>::infinity();
  std::vector<ComplexityRow> rows;
  for (const auto& [name, runs] : curves) {
    ComplexityRow row{name, {}};
    for (double tau : thresholds) {
      std::vector<double> hits;
      for (const auto& curve : runs) {
        const auto s = samples_to_threshold(curve, tau);
        hits.push_back(s ? static_cast<double>(*s) : kNever);
      }
      std::sort(hits.begin(), hits.end());
      if (aggregation == Aggregation::kTrimmed && hits.size() >= 3) {
        hits = std::vector<double>(hits.begin() + 1, hits.end() - 1);
      }
      ThresholdCell cell;
      cell.runs = hits.size();
      double sum = 0.0;
      for (double h : hits) {
        if (h == kNever) continue;
        sum += h;
        ++cell.reached;
      }
      if (cell.reached > 0) cell.mean_samples = sum / static_cast<double>(cell.reached);
      row.cells.push_back(cell);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_complexity_table(const std::vector<ComplexityRow>& rows,
                                    const std::vector<double>& thresholds) {
  std::string out = fmt::format("{:<10}", "spec");
  for (double tau : thresholds) out += fmt::format("{:>18}", fmt::format("tau={}", tau));
  out += '\n';
  for (const auto& row : rows) {
    out += fmt::format("{:<10}", row.benchmark);
    for (const auto& cell : row.cells) {
      std::string text = cell.mean_samples ? fmt::format("{:.0f}", *cell.mean_samples) : "-";
      if (cell.censored()) text += fmt::format(" ({}/{})", cell.reached, cell.runs);
      out += fmt::format("{:>18}", text);
    }
    out += '\n';
  }
  return out;
}

}  // namespace taskspec
