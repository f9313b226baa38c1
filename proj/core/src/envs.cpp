#include "taskspec/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace taskspec {

double linf_distance(StateView s, double x, double y) {
  return std::max(std::abs(s[0] - x), std::abs(s[1] - y));
}

double signed_box_distance(StateView s, double x_lo, double x_hi, double y_lo, double y_hi) {
  const double dx = std::max({x_lo - s[0], 0.0, s[0] - x_hi});
  const double dy = std::max({y_lo - s[1], 0.0, s[1] - y_hi});
  const double outside = std::max(dx, dy);
  if (outside > 0.0) return outside;
  // Inside or on the boundary: distance to the nearest edge, negated.
  return -std::min({s[0] - x_lo, x_hi - s[0], s[1] - y_lo, y_hi - s[1]});
}

namespace {

double far_offset(double lo, double hi, double a, double b) {
  return std::max({std::abs(lo - a), std::abs(hi - a), std::abs(lo - b), std::abs(hi - b)});
}

}  // namespace

void add_planar_predicates(PredicateRegistry& registry) {
  registry.add(AtomicPredicateDecl{
      "reach", 2,
      [](StateView s, ParamView p) { return linf_distance(s, p[0], p[1]) < 1.0; },
      [](StateView s, ParamView p) { return 1.0 - linf_distance(s, p[0], p[1]); },
      [](const StateBox& box, ParamView p) {
        const double far = std::max(far_offset(box.lower[0], box.upper[0], p[0], p[0]),
                                    far_offset(box.lower[1], box.upper[1], p[1], p[1]));
        return std::max(1.0, far - 1.0);
      }});
  registry.add(AtomicPredicateDecl{
      "avoid", 4,
      [](StateView s, ParamView p) {
        const bool inside = s[0] >= p[0] && s[0] <= p[1] && s[1] >= p[2] && s[1] <= p[3];
        return !inside;
      },
      [](StateView s, ParamView p) { return signed_box_distance(s, p[0], p[1], p[2], p[3]); },
      [](const StateBox& box, ParamView p) {
        return std::max(far_offset(box.lower[0], box.upper[0], p[0], p[1]),
                        far_offset(box.lower[1], box.upper[1], p[2], p[3]));
      }});
}

// ------------------------------------------------------------ point robot

PointRobotEnv::PointRobotEnv(PointRobotParams params)
    : params_(params), clamps_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  add_planar_predicates(registry_);
  registry_.add(AtomicPredicateDecl{
      "fuel_positive", 0, [](StateView s, ParamView) { return s[2] > 0.0; },
      [](StateView s, ParamView) { return s[2]; },
      [](const StateBox& box, ParamView) {
        return std::max(std::abs(box.lower[2]), std::abs(box.upper[2]));
      }});
}

State PointRobotEnv::initial_state(Rng&) const {
  return {params_.initial_state[0], params_.initial_state[1], params_.initial_state[2]};
}

State PointRobotEnv::step(StateView s, std::span<const double> a, Rng& rng) const {
  double u[2];
  for (int i = 0; i < 2; ++i) {
    u[i] = std::clamp(a[i], -1.0, 1.0);
    if (u[i] != a[i]) clamps_->fetch_add(1, std::memory_order_relaxed);
  }
  double eps[2] = {0.0, 0.0};
  if (params_.noise_stddev > 0.0) {
    std::normal_distribution<double> noise(0.0, params_.noise_stddev);
    eps[0] = noise(rng);
    eps[1] = noise(rng);
  }
  const double speed = std::hypot(u[0], u[1]);
  return {s[0] + u[0] + eps[0], s[1] + u[1] + eps[1], s[2] - 0.1 * std::abs(s[0]) * speed};
}

StateBox PointRobotEnv::reachable_box() const {
  const double reach = params_.horizon * (1.0 + 4.0 * params_.noise_stddev);
  const auto& s0 = params_.initial_state;
  StateBox box{{s0[0] - reach, s0[1] - reach, 0.0}, {s0[0] + reach, s0[1] + reach, s0[2]}};
  const double max_x1 = std::abs(s0[0]) + reach;
  box.lower[2] = s0[2] - params_.horizon * 0.1 * max_x1 * std::numbers::sqrt2;
  return box;
}

// --------------------------------------------------------------- cart-pole

CartPoleEnv::CartPoleEnv(CartPoleParams params) : params_(params) {
  constexpr double kLimit = std::numbers::pi / 15.0;
  registry_.add(AtomicPredicateDecl{
      "balance", 0, [](StateView s, ParamView) { return std::abs(s[2]) < kLimit; },
      [](StateView s, ParamView) { return kLimit - std::abs(s[2]); },
      [](const StateBox& box, ParamView) {
        return kLimit + std::max(std::abs(box.lower[2]), std::abs(box.upper[2]));
      }});
  registry_.add(AtomicPredicateDecl{
      "reach", 1, [](StateView s, ParamView p) { return std::abs(s[0] - p[0]) < 1.0; },
      [](StateView s, ParamView p) { return 1.0 - std::abs(s[0] - p[0]); },
      [](const StateBox& box, ParamView p) {
        return 1.0 + std::max(std::abs(box.lower[0] - p[0]), std::abs(box.upper[0] - p[0]));
      }});
}

State CartPoleEnv::initial_state(Rng& rng) const {
  std::uniform_real_distribution<double> init(-params_.initial_spread, params_.initial_spread);
  State s(4);
  for (auto& v : s) v = init(rng);
  return s;
}

State CartPoleEnv::step(StateView s, std::span<const double> a, Rng&) const {
  const double force = params_.force_scale * std::clamp(a[0], -1.0, 1.0);
  const double total_mass = params_.cart_mass + params_.pole_mass;
  const double pole_moment = params_.pole_mass * params_.half_pole_length;
  const double cos_t = std::cos(s[2]);
  const double sin_t = std::sin(s[2]);
  const double temp = (force + pole_moment * s[3] * s[3] * sin_t) / total_mass;
  const double theta_acc =
      (params_.gravity * sin_t - cos_t * temp) /
      (params_.half_pole_length *
       (4.0 / 3.0 - params_.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - pole_moment * theta_acc * cos_t / total_mass;
  const double dt = params_.dt;
  return {s[0] + dt * s[1], s[1] + dt * x_acc, s[2] + dt * s[3], s[3] + dt * theta_acc};
}

StateBox CartPoleEnv::reachable_box() const {
  // Force-limited motion over the horizon; the pole may swing freely.
  const double t = params_.horizon * params_.dt;
  const double acc = 2.0 * params_.force_scale / params_.cart_mass;
  const double x = 0.5 * acc * t * t + 1.0;
  const double spin = 50.0 * t;
  return {{-x, -acc * t, -spin, -50.0}, {x, acc * t, spin, 50.0}};
}

// -------------------------------------------------------------------- grid

GridEnv::GridEnv(GridParams params) : params_(params) { add_planar_predicates(registry_); }

State GridEnv::initial_state(Rng&) const {
  return {static_cast<double>(params_.start[0]), static_cast<double>(params_.start[1])};
}

State GridEnv::step(StateView s, std::span<const double> a, Rng&) const {
  double dx = 0.0;
  double dy = 0.0;
  if (std::abs(a[0]) >= std::abs(a[1])) {
    if (std::abs(a[0]) >= 0.5) dx = a[0] > 0 ? 1.0 : -1.0;
  } else if (std::abs(a[1]) >= 0.5) {
    dy = a[1] > 0 ? 1.0 : -1.0;
  }
  return {std::clamp(s[0] + dx, 0.0, params_.width - 1.0),
          std::clamp(s[1] + dy, 0.0, params_.height - 1.0)};
}

StateBox GridEnv::reachable_box() const {
  return {{0.0, 0.0}, {params_.width - 1.0, params_.height - 1.0}};
}

std::vector<Action> GridEnv::discrete_actions() const {
  return {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
}

}  // namespace taskspec
