#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "taskspec/augmented.hpp"
#include "taskspec/policy.hpp"
#include "taskspec/spec.hpp"

namespace taskspec {

enum class RewardMode { kShaped, kUnshaped, kTltl };

std::string to_string(RewardMode mode);
// Accepts "shaped", "unshaped", "tltl".
RewardMode parse_reward_mode(const std::string& text);

struct ArsConfig {
  std::size_t directions = 30;
  std::size_t top_directions = 15;
  double step_size = 0.02;
  double noise = 0.03;
  std::size_t rollouts_per_direction = 1;
  std::size_t iterations = 100;
  std::uint64_t seed = 0;
  // Satisfaction is estimated before the first iteration, every
  // `eval_every` iterations and after the last one.
  std::size_t eval_every = 10;
  std::size_t eval_rollouts = 100;
  // Stop once an estimate reaches this satisfaction.
  std::optional<double> stop_at;
  std::size_t threads = 1;

  // Throws std::invalid_argument.
  void validate() const;
  std::size_t samples_per_iteration() const { return 2 * directions * rollouts_per_direction; }
};

// Everything a rollout needs. The spec is used by the TLTL reward and by the
// satisfaction oracle; the monitor must be compile(spec).
struct Task {
  const Environment& env;
  const Spec& spec;
  const TaskMonitor& monitor;
  ShapingConstants shaping;
};

Task make_task(const Environment& env, const Spec& spec, const TaskMonitor& monitor,
               const ShapingOverrides& overrides = {});

struct EvalResult {
  double mean_reward = 0.0;
  double satisfaction = 0.0;
  // Rollouts whose monitor accepted with a positive reward although the
  // oracle rejects them; always a bug.
  std::size_t agreement_violations = 0;
  // Rollouts the oracle accepts but the policy's own monitor run did not.
  std::size_t unwitnessed = 0;
};

// Runs n rollouts from streams derived from `seed`. Satisfaction comes from
// eval_bool on the projected rollouts; the reward is the mode's training
// reward.
EvalResult evaluate(const PolicyModuleSet& policy, std::span<const double> params,
                    const Task& task, RewardMode mode, std::size_t n, std::uint64_t seed);

struct CurvePoint {
  std::size_t samples = 0;
  double satisfaction = 0.0;
  double mean_reward = 0.0;
  std::size_t iteration = 0;
};

struct TrainStats {
  std::size_t agreement_violations = 0;
  std::size_t unwitnessed = 0;
  // Training rollouts with |alpha| above C_u at some step.
  std::size_t alpha_bound_violations = 0;
  // Training rollouts whose final-state reward is <= C_l.
  std::size_t lower_bound_violations = 0;
  double max_abs_alpha = 0.0;
  std::size_t iterations = 0;
  std::size_t samples = 0;
};

struct TrainResult {
  PolicyModuleSet policy;
  std::vector<CurvePoint> curve;
  TrainStats stats;
};

class NonFiniteReward : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ProgressCallback = std::function<void(const CurvePoint&)>;

// Basic ARS with top-b direction selection and reward-std normalization over
// the concatenated parameters of all modules. Shaped and unshaped modes train
// one module per monitor state; TLTL mode trains a single module on the
// spec's robustness. Reproducible for a fixed config regardless of threads.
TrainResult train(const Task& task, const ArsConfig& config, RewardMode mode,
                  const ProgressCallback& progress = {});

// Reward of one rollout under the given mode, from a stream seeded by `seed`.
double rollout_reward(const PolicyModuleSet& policy, std::span<const double> params,
                      const Task& task, RewardMode mode, std::uint64_t seed);

}  // namespace taskspec
