#include "taskspec/ars.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "taskspec/semantics.hpp"

namespace taskspec {

std::string to_string(RewardMode mode) {
  switch (mode) {
    case RewardMode::kShaped: return "shaped";
    case RewardMode::kUnshaped: return "unshaped";
    case RewardMode::kTltl: return "tltl";
  }
  return "?";
}

RewardMode parse_reward_mode(const std::string& text) {
  if (text == "shaped") return RewardMode::kShaped;
  if (text == "unshaped") return RewardMode::kUnshaped;
  if (text == "tltl") return RewardMode::kTltl;
  throw std::invalid_argument(
      fmt::format("unknown mode '{}' (expected shaped, unshaped or tltl)", text));
}

void ArsConfig::validate() const {
  if (directions == 0) throw std::invalid_argument("directions must be positive");
  if (top_directions == 0 || top_directions > directions) {
    throw std::invalid_argument("top_directions must be in [1, directions]");
  }
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  if (!(noise > 0.0)) throw std::invalid_argument("noise must be positive");
  if (rollouts_per_direction == 0) {
    throw std::invalid_argument("rollouts_per_direction must be positive");
  }
  if (eval_every == 0) throw std::invalid_argument("eval_every must be positive");
  if (eval_rollouts == 0) throw std::invalid_argument("eval_rollouts must be positive");
  if (threads == 0) throw std::invalid_argument("threads must be positive");
}

Task make_task(const Environment& env, const Spec& spec, const TaskMonitor& monitor,
               const ShapingOverrides& overrides) {
  return Task{env, spec, monitor, shaping_constants(monitor, env.reachable_box(), overrides)};
}

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kDirectionTag = 2;
constexpr std::uint64_t kRolloutTag = 3;
constexpr std::uint64_t kEvalTag = 4;

struct Outcome {
  double reward = 0.0;
  std::optional<double> terminal;
  double max_abs_alpha = 0.0;
  Rollout projected;
};

Outcome simulate(const PolicyModuleSet& policy, std::span<const double> params,
                 const Task& task, RewardMode mode, Rng& rng, bool keep_projection) {
  const bool need_projection = keep_projection || mode == RewardMode::kTltl;
  Outcome out;
  RewardTracker tracker(task.monitor, task.shaping);
  AugmentedState state = reset(task.env, task.monitor, rng);
  tracker.begin(state);
  if (need_projection) out.projected.states.push_back(state.env);
  const int horizon = task.env.horizon();
  for (int t = 0; t < horizon; ++t) {
    AugmentedAction action = policy.act(state, task.monitor, params);
    AugmentedState next = step(state, action, task.env, task.monitor, rng);
    if (mode == RewardMode::kShaped) tracker.observe_step(state, next);
    if (need_projection) {
      out.projected.states.push_back(next.env);
      out.projected.actions.push_back(std::move(action.env));
    }
    state = std::move(next);
  }
  out.terminal = tracker.terminal(state);
  out.max_abs_alpha = tracker.max_abs_alpha();
  switch (mode) {
    case RewardMode::kShaped: out.reward = tracker.shaped(state); break;
    case RewardMode::kUnshaped:
      // Bottom maps to C_l, which lies below every final-state reward.
      out.reward = out.terminal ? *out.terminal : task.shaping.c_lower;
      break;
    case RewardMode::kTltl: out.reward = eval_quant(task.spec, out.projected); break;
  }
  if (!std::isfinite(out.reward)) {
    throw NonFiniteReward(fmt::format("{} reward is not finite ({})", to_string(mode),
                                      out.reward));
  }
  return out;
}

template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

double rollout_reward(const PolicyModuleSet& policy, std::span<const double> params,
                      const Task& task, RewardMode mode, std::uint64_t seed) {
  Rng rng(seed);
  return simulate(policy, params, task, mode, rng, false).reward;
}

EvalResult evaluate(const PolicyModuleSet& policy, std::span<const double> params,
                    const Task& task, RewardMode mode, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("evaluate needs at least one rollout");
  EvalResult result;
  double reward_sum = 0.0;
  std::size_t satisfied = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, i));
    const Outcome o = simulate(policy, params, task, mode, rng, true);
    const bool sat = eval_bool(task.spec, o.projected);
    reward_sum += o.reward;
    satisfied += sat ? 1 : 0;
    if (policy.kind() == PolicyModuleSet::Kind::kPerState) {
      const bool accepted = o.terminal && *o.terminal > 0.0;
      if (accepted && !sat) ++result.agreement_violations;
      if (sat && !accepted) ++result.unwitnessed;
    }
  }
  result.mean_reward = reward_sum / static_cast<double>(n);
  result.satisfaction = static_cast<double>(satisfied) / static_cast<double>(n);
  return result;
}

TrainResult train(const Task& task, const ArsConfig& config, RewardMode mode,
                  const ProgressCallback& progress) {
  config.validate();
  TrainResult result{mode == RewardMode::kTltl
                         ? PolicyModuleSet::single(task.monitor, task.env)
                         : PolicyModuleSet::per_state(task.monitor, task.env),
                     {},
                     {}};
  {
    Rng init_rng(derive_seed(config.seed, kInitTag));
    result.policy.randomize(init_rng);
  }
  std::span<double> theta = result.policy.params();
  const std::size_t dim = theta.size();
  const std::size_t n_dir = config.directions;
  const std::size_t n_roll = config.rollouts_per_direction;
  auto& stats = result.stats;

  auto record = [&](std::size_t iteration) {
    const EvalResult e = evaluate(result.policy, theta, task, mode, config.eval_rollouts,
                                  derive_seed(config.seed, kEvalTag, iteration));
    stats.agreement_violations += e.agreement_violations;
    stats.unwitnessed += e.unwitnessed;
    CurvePoint p{stats.samples, e.satisfaction, e.mean_reward, iteration};
    result.curve.push_back(p);
    if (progress) progress(p);
    return config.stop_at && e.satisfaction >= *config.stop_at;
  };

  if (config.iterations == 0) return result;
  if (record(0)) return result;

  std::vector<double> deltas(n_dir * dim);
  std::vector<double> plus(n_dir);
  std::vector<double> minus(n_dir);
  std::vector<double> max_alpha(n_dir);
  std::vector<std::size_t> alpha_violations(n_dir);
  std::vector<std::size_t> lower_violations(n_dir);

  for (std::size_t it = 1; it <= config.iterations; ++it) {
    parallel_for(n_dir, config.threads, [&](std::size_t k) {
      Rng dir_rng(derive_seed(config.seed, kDirectionTag, it, k));
      std::normal_distribution<double> normal(0.0, 1.0);
      std::span<double> delta(deltas.data() + k * dim, dim);
      for (auto& d : delta) d = normal(dir_rng);

      std::vector<double> candidate(dim);
      double sums[2] = {0.0, 0.0};
      max_alpha[k] = 0.0;
      alpha_violations[k] = 0;
      lower_violations[k] = 0;
      for (int sign = 0; sign < 2; ++sign) {
        const double scale = sign == 0 ? config.noise : -config.noise;
        for (std::size_t i = 0; i < dim; ++i) candidate[i] = theta[i] + scale * delta[i];
        for (std::size_t r = 0; r < n_roll; ++r) {
          // Both signs see the same environment noise.
          Rng rng(derive_seed(config.seed, kRolloutTag, it, k * n_roll + r));
          const Outcome o = simulate(result.policy, candidate, task, mode, rng, false);
          sums[sign] += o.reward;
          max_alpha[k] = std::max(max_alpha[k], o.max_abs_alpha);
          if (mode == RewardMode::kShaped && o.max_abs_alpha > task.shaping.c_upper) {
            ++alpha_violations[k];
          }
          if (o.terminal && *o.terminal <= task.shaping.c_lower) ++lower_violations[k];
        }
      }
      plus[k] = sums[0] / static_cast<double>(n_roll);
      minus[k] = sums[1] / static_cast<double>(n_roll);
    });

    for (std::size_t k = 0; k < n_dir; ++k) {
      stats.max_abs_alpha = std::max(stats.max_abs_alpha, max_alpha[k]);
      stats.alpha_bound_violations += alpha_violations[k];
      stats.lower_bound_violations += lower_violations[k];
    }

    std::vector<std::size_t> order(n_dir);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::max(plus[a], minus[a]) > std::max(plus[b], minus[b]);
    });
    const std::size_t top = config.top_directions;
    double mean = 0.0;
    for (std::size_t j = 0; j < top; ++j) mean += plus[order[j]] + minus[order[j]];
    mean /= static_cast<double>(2 * top);
    double var = 0.0;
    for (std::size_t j = 0; j < top; ++j) {
      var += (plus[order[j]] - mean) * (plus[order[j]] - mean);
      var += (minus[order[j]] - mean) * (minus[order[j]] - mean);
    }
    const double sigma = std::sqrt(var / static_cast<double>(2 * top));
    // All selected rewards equal: no direction carries information.
    if (sigma > 1e-12) {
      const double scale = config.step_size / (static_cast<double>(top) * sigma);
      for (std::size_t j = 0; j < top; ++j) {
        const std::size_t k = order[j];
        const double w = scale * (plus[k] - minus[k]);
        const double* delta = deltas.data() + k * dim;
        for (std::size_t i = 0; i < dim; ++i) theta[i] += w * delta[i];
      }
    }

    stats.samples += config.samples_per_iteration();
    stats.iterations = it;
    if (it % config.eval_every == 0 || it == config.iterations) {
      if (record(it)) break;
    }
  }
  return result;
}

}  // namespace taskspec
