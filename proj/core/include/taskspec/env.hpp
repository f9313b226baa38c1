#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "taskspec/predicate.hpp"
#include "taskspec/semantics.hpp"

namespace taskspec {

using Rng = std::mt19937_64;

// splitmix64 finalizer; derives independent stream seeds from a master seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  return mix_seed(mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b) ^ c);
}

// Finite-horizon MDP with continuous states and actions. Implementations are
// immutable; `step` is pure given the RNG stream.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual State initial_state(Rng& rng) const = 0;
  // Actions outside [-1, 1]^m are clamped.
  virtual State step(StateView s, std::span<const double> a, Rng& rng) const = 0;

  virtual const PredicateRegistry& predicates() const = 0;
  // Box containing every state reachable within the horizon (with high
  // probability for noisy dynamics).
  virtual StateBox reachable_box() const = 0;
  // Finite action set for exhaustive enumeration; empty for continuous envs.
  virtual std::vector<Action> discrete_actions() const { return {}; }
};

}  // namespace taskspec
