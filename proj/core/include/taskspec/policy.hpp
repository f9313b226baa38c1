#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "taskspec/augmented.hpp"
#include "taskspec/env.hpp"
#include "taskspec/monitor.hpp"

namespace taskspec {

// Fully connected network: ReLU hidden layers, tanh output. Parameters live
// in an external flat buffer laid out layer by layer as (weights row-major
// [out][in], biases).
class Mlp {
 public:
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t num_params() const { return num_params_; }

  // Glorot-uniform hidden weights; zero output layer and biases, so a fresh
  // network outputs 0 and perturbations act on the action directly.
  void init(std::span<double> params, Rng& rng) const;
  void forward(std::span<const double> params, std::span<const double> input,
               std::span<double> output) const;

 private:
  std::vector<std::size_t> sizes_;
  std::size_t num_params_ = 0;
};

struct PolicyOptions {
  std::vector<std::size_t> hidden{30, 30};
  // Registers are clipped to [-clip, clip] before entering a network.
  double register_clip = 10.0;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Policy networks for an augmented MDP. In per-state form there is one
// module per monitor state with input (s, clip(v)) and output width m + k_q,
// k_q the number of non-self exits of q. In single form one module maps s
// alone to the env action and the monitor never leaves its initial state.
class PolicyModuleSet {
 public:
  enum class Kind { kPerState, kSingle };

  static PolicyModuleSet per_state(const TaskMonitor& monitor, const Environment& env,
                                   const PolicyOptions& options = {});
  static PolicyModuleSet single(const TaskMonitor& monitor, const Environment& env,
                                const PolicyOptions& options = {{50, 50}, 10.0});

  Kind kind() const { return kind_; }
  std::size_t num_modules() const { return modules_.size(); }
  const Mlp& module(std::size_t i) const { return modules_[i]; }
  std::size_t module_offset(std::size_t i) const { return offsets_[i]; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t state_dim() const { return state_dim_; }
  double register_clip() const { return register_clip_; }
  std::uint64_t monitor_fingerprint() const { return fingerprint_; }

  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  void randomize(Rng& rng);

  // Uses `params` (same layout as params()) in place of the stored ones.
  AugmentedAction act(const AugmentedState& state, const TaskMonitor& monitor,
                      std::span<const double> params) const;
  AugmentedAction act(const AugmentedState& state, const TaskMonitor& monitor) const {
    return act(state, monitor, params_);
  }

  void save(std::ostream& out) const;
  // Throws CheckpointError on malformed input or when the stored fingerprint
  // differs from the monitor's.
  static PolicyModuleSet load(std::istream& in, const TaskMonitor& monitor);

 private:
  PolicyModuleSet() = default;
  void layout();

  Kind kind_ = Kind::kPerState;
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  std::size_t num_registers_ = 0;
  double register_clip_ = 10.0;
  std::uint64_t fingerprint_ = 0;
  std::vector<Mlp> modules_;
  std::vector<std::size_t> offsets_;
  std::vector<std::vector<std::size_t>> exits_;
  std::vector<std::size_t> self_loops_;
  std::vector<double> params_;
};

// AugmentedPolicy view of a module set with an explicit parameter vector.
class ModulePolicy final : public AugmentedPolicy {
 public:
  ModulePolicy(const PolicyModuleSet& set, std::span<const double> params)
      : set_(set), params_(params) {}
  explicit ModulePolicy(const PolicyModuleSet& set) : ModulePolicy(set, set.params()) {}

  AugmentedAction act(const AugmentedState& state, const TaskMonitor& monitor) const override {
    return set_.act(state, monitor, params_);
  }

 private:
  const PolicyModuleSet& set_;
  std::span<const double> params_;
};

}  // namespace taskspec
