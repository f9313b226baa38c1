#pragma once

#include <random>
#include <string>
#include <vector>

#include "taskspec/env.hpp"
#include "taskspec/envs.hpp"
#include "taskspec/predicate.hpp"
#include "taskspec/semantics.hpp"
#include "taskspec/spec.hpp"

namespace taskspec::testing {

// Planar registry plus two nullary predicates on the first coordinate:
// pos (s0 > 0) and big (s0 > 2).
inline PredicateRegistry toy_registry() {
  PredicateRegistry r;
  add_planar_predicates(r);
  r.add(AtomicPredicateDecl{"pos", 0, [](StateView s, ParamView) { return s[0] > 0.0; },
                            [](StateView s, ParamView) { return s[0]; },
                            [](const StateBox& b, ParamView) {
                              return std::max(std::abs(b.lower[0]), std::abs(b.upper[0]));
                            }});
  r.add(AtomicPredicateDecl{"big", 0, [](StateView s, ParamView) { return s[0] > 2.0; },
                            [](StateView s, ParamView) { return s[0] - 2.0; },
                            [](const StateBox& b, ParamView) {
                              return std::max(std::abs(b.lower[0] - 2.0),
                                              std::abs(b.upper[0] - 2.0));
                            }});
  return r;
}

inline Predicate random_atom(const PredicateRegistry& reg, std::mt19937_64& rng, int extent) {
  std::uniform_int_distribution<int> coord(0, extent);
  std::uniform_int_distribution<int> pick(0, 3);
  switch (pick(rng)) {
    case 0:
    case 1: {
      return Predicate::atom(reg.find("reach"),
                             {static_cast<double>(coord(rng)), static_cast<double>(coord(rng))});
    }
    case 2: {
      const double x = coord(rng);
      const double y = coord(rng);
      return Predicate::atom(reg.find("avoid"), {x - 0.5, x + 0.5, y - 0.5, y + 0.5});
    }
    default:
      return Predicate::atom(reg.find(coord(rng) % 2 ? "pos" : "big"), {});
  }
}

inline Predicate random_predicate(const PredicateRegistry& reg, std::mt19937_64& rng,
                                  int depth, int extent) {
  std::uniform_int_distribution<int> pick(0, 3);
  const int choice = depth <= 0 ? 0 : pick(rng);
  if (choice <= 1) return random_atom(reg, rng, extent);
  Predicate l = random_predicate(reg, rng, depth - 1, extent);
  Predicate r = random_predicate(reg, rng, depth - 1, extent);
  return choice == 2 ? Predicate::conj(l, r) : Predicate::disj(l, r);
}

// Uniform over the four constructors down to `depth`, achieve at the leaves.
inline Spec random_spec(const PredicateRegistry& reg, std::mt19937_64& rng, int depth,
                        int extent = 3) {
  std::uniform_int_distribution<int> pick(0, 3);
  const int choice = depth <= 0 ? 0 : pick(rng);
  switch (choice) {
    case 0: return Spec::achieve(random_predicate(reg, rng, 1, extent));
    case 1:
      return Spec::ensuring(random_spec(reg, rng, depth - 1, extent),
                            random_predicate(reg, rng, 1, extent));
    case 2:
      return Spec::seq(random_spec(reg, rng, depth - 1, extent),
                       random_spec(reg, rng, depth - 1, extent));
    default:
      return Spec::choice(random_spec(reg, rng, depth - 1, extent),
                          random_spec(reg, rng, depth - 1, extent));
  }
}

// Random walk on the integer lattice [0, extent]^2 with occasional jumps.
inline Rollout random_rollout(std::mt19937_64& rng, std::size_t length, int extent = 3) {
  std::uniform_int_distribution<int> coord(0, extent);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  Rollout r;
  for (std::size_t i = 0; i <= length; ++i) {
    r.states.push_back({coord(rng) + jitter(rng), coord(rng) + jitter(rng)});
    if (i > 0) r.actions.push_back({0.0, 0.0});
  }
  return r;
}

}  // namespace taskspec::testing
