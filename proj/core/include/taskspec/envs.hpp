#pragma once

#include <array>
#include <atomic>
#include <memory>

#include "taskspec/env.hpp"

namespace taskspec {

// Shared geometry helpers for the built-in predicates. Positions are the
// first two state coordinates.

// L-inf distance from the position to a point.
double linf_distance(StateView s, double x, double y);
// Signed L-inf distance to the closed box [x_lo, x_hi] x [y_lo, y_hi]:
// positive outside, zero on the boundary, negative inside.
double signed_box_distance(StateView s, double x_lo, double x_hi, double y_lo, double y_hi);

// reach(x, y), avoid(x_lo, x_hi, y_lo, y_hi) over the first two coordinates.
void add_planar_predicates(PredicateRegistry& registry);

struct PointRobotParams {
  double noise_stddev = 0.05;
  int horizon = 40;
  std::array<double, 3> initial_state{5.0, 0.0, 7.0};
};

// State (x1, x2, fuel); action: velocity in [-1, 1]^2.
//   x' = x + a + eps, eps ~ N(0, sigma^2 I)
//   fuel' = fuel - 0.1 * |x1| * ||a||_2
// Predicates: reach, avoid, fuel_positive.
class PointRobotEnv final : public Environment {
 public:
  explicit PointRobotEnv(PointRobotParams params = {});

  std::string name() const override { return "point_robot"; }
  std::size_t state_dim() const override { return 3; }
  std::size_t action_dim() const override { return 2; }
  int horizon() const override { return params_.horizon; }
  State initial_state(Rng& rng) const override;
  State step(StateView s, std::span<const double> a, Rng& rng) const override;
  const PredicateRegistry& predicates() const override { return registry_; }
  StateBox reachable_box() const override;

  const PointRobotParams& params() const { return params_; }
  // Number of action components clamped into [-1, 1] so far.
  std::uint64_t clamp_count() const { return clamps_->load(); }

 private:
  PointRobotParams params_;
  PredicateRegistry registry_;
  std::shared_ptr<std::atomic<std::uint64_t>> clamps_;
};

struct CartPoleParams {
  double gravity = 9.8;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_pole_length = 0.5;
  double force_scale = 10.0;
  double dt = 0.02;
  int horizon = 200;
  double initial_spread = 0.05;
};

// Continuous-force cart-pole with the usual open-source physics constants and
// Euler integration. State (x, x_dot, theta, theta_dot); action in [-1, 1]
// scaled by force_scale; no early termination.
// Predicates: balance (|theta| < pi/15), reach(c) on the cart position.
class CartPoleEnv final : public Environment {
 public:
  explicit CartPoleEnv(CartPoleParams params = {});

  std::string name() const override { return "cartpole"; }
  std::size_t state_dim() const override { return 4; }
  std::size_t action_dim() const override { return 1; }
  int horizon() const override { return params_.horizon; }
  State initial_state(Rng& rng) const override;
  State step(StateView s, std::span<const double> a, Rng& rng) const override;
  const PredicateRegistry& predicates() const override { return registry_; }
  StateBox reachable_box() const override;

 private:
  CartPoleParams params_;
  PredicateRegistry registry_;
};

struct GridParams {
  int width = 4;
  int height = 4;
  int horizon = 4;
  std::array<int, 2> start{0, 0};
};

// Deterministic grid world for exhaustive checks. State (col, row); actions
// are the four unit moves, blocked at the border. Continuous actions are
// rounded to the nearest move. Predicates: reach, avoid.
class GridEnv final : public Environment {
 public:
  explicit GridEnv(GridParams params = {});

  std::string name() const override { return "grid"; }
  std::size_t state_dim() const override { return 2; }
  std::size_t action_dim() const override { return 2; }
  int horizon() const override { return params_.horizon; }
  State initial_state(Rng& rng) const override;
  State step(StateView s, std::span<const double> a, Rng& rng) const override;
  const PredicateRegistry& predicates() const override { return registry_; }
  StateBox reachable_box() const override;
  std::vector<Action> discrete_actions() const override;

 private:
  GridParams params_;
  PredicateRegistry registry_;
};

}  // namespace taskspec
