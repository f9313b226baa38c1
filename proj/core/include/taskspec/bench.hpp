#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "taskspec/ars.hpp"
#include "taskspec/config.hpp"
#include "taskspec/env.hpp"
#include "taskspec/monitor.hpp"
#include "taskspec/spec.hpp"

namespace taskspec {

struct BenchmarkEntry {
  std::string name;
  std::string env;
  std::string spec;
  std::size_t budget = 0;  // sample rollouts
  double threshold = 0.0;  // target satisfaction
};

// phi1 ... phi7 on the point robot and `cartpole`.
const std::vector<BenchmarkEntry>& benchmark_suite();

class UnknownBenchmark : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws UnknownBenchmark listing the available names.
const BenchmarkEntry& find_benchmark(std::string_view name);

// "point_robot", "cartpole" or "grid". Reads `noise_stddev` and `horizon`.
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const Config& config = {});

// ARS settings: directions, top_directions, step_size, perturbation_stddev,
// rollouts_per_direction, eval_every, eval_rollouts, stop_at, threads.
ArsConfig ars_config_from(const Config& config, ArsConfig base = {});
// split_conjuncts.
CompileOptions compile_options_from(const Config& config);
// c_lower, c_upper.
ShapingOverrides shaping_overrides_from(const Config& config);

// An environment with a parsed and compiled specification.
struct Problem {
  std::unique_ptr<Environment> env;
  Spec spec;
  TaskMonitor monitor;
  ShapingConstants shaping;

  Task task() const { return Task{*env, spec, monitor, shaping}; }
};

Problem make_problem(const std::string& env_name, const std::string& spec_text,
                     const Config& config = {});

struct RunOptions {
  RewardMode mode = RewardMode::kShaped;
  std::uint64_t seed = 0;
  std::size_t budget = 0;  // sample rollouts; iterations = budget / samples per iteration
  ArsConfig ars;
  // When set, the curve is written to <out_dir>/<csv_filename(...)>.
  std::optional<std::filesystem::path> out_dir;
  ProgressCallback progress;
};

struct RunResult {
  TrainResult train;
  std::optional<std::filesystem::path> csv_path;
  double final_satisfaction = 0.0;
};

RunResult run_benchmark(const std::string& label, const Problem& problem,
                        const RunOptions& options);

std::string csv_filename(const std::string& label, RewardMode mode, std::uint64_t seed);

// Header `samples,satisfaction,mean_shaped_reward,iteration,seed`.
void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve,
                     std::uint64_t seed);
std::vector<CurvePoint> read_curve_csv(std::istream& in);

// First sample count whose satisfaction estimate is >= tau.
std::optional<std::size_t> samples_to_threshold(const std::vector<CurvePoint>& curve,
                                                double tau);

enum class Aggregation {
  kUntrimmed,
  // Drops the fastest and slowest run when there are at least three.
  kTrimmed,
};

struct ThresholdCell {
  // Mean samples over the runs that reached the threshold.
  std::optional<double> mean_samples;
  std::size_t reached = 0;
  std::size_t runs = 0;

  bool censored() const { return reached < runs; }
};

struct ComplexityRow {
  std::string benchmark;
  std::vector<ThresholdCell> cells;  // one per threshold
};

// `curves` maps a benchmark name to one curve per seed.
std::vector<ComplexityRow> sample_complexity(
    const std::vector<std::pair<std::string, std::vector<std::vector<CurvePoint>>>>& curves,
    const std::vector<double>& thresholds, Aggregation aggregation);

// Fixed-width table. Censored cells show the mean over the runs that reached
// the threshold followed by "(reached/runs)", or "-" when none did.
std::string format_complexity_table(const std::vector<ComplexityRow>& rows,
                                    const std::vector<double>& thresholds);

// The nested-sequencing family used by the sample-complexity report.
const std::vector<std::string>& complexity_benchmarks();

}  // namespace taskspec
