#pragma once

#include "aqmlab/som.hpp"

#include <cstdint>
#include <numbers>
#include <vector>

namespace aqmlab {

/// Classic cart-pole benchmark constants (Euler integration).
struct CartPoleParams {
  double m_cart = 1.0;      // kg
  double m_pole = 0.1;      // kg
  double half_length = 0.5; // m
  double gravity = 9.8;     // m/s^2
  double dt = 0.02;         // s
  double force_mag = 10.0;  // N, actuator limit
  double fail_angle = 12.0 * std::numbers::pi / 180.0; // rad
};

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0; // rad from upright, positive leans toward +x
  double theta_dot = 0.0;
};

CartPoleState cartpole_step(const CartPoleState& s, double force, const CartPoleParams& p = {});

/// Linear reference controller used as the teaching signal.
struct PoleTeacher {
  double k_angle = 25.0;   // N/rad
  double k_rate = 3.0;     // N s/rad
};

struct PoleValidationOptions {
  CartPoleParams plant{};
  PoleTeacher teacher{};
  std::size_t side = SomMap::kDefaultSide;
  /// Angle mapped onto the [0,1] edges of the SOM input square.
  double input_angle_range = 12.0 * std::numbers::pi / 180.0;
  std::size_t train_steps_per_episode = 500;
  std::size_t eval_steps = 1000;
  std::size_t eval_starts = 20;
  double start_angle = 0.05; // initial |theta| bound, rad
};

struct ValidationReport {
  std::vector<std::size_t> untrained_steps;
  std::vector<std::size_t> trained_steps;
  double untrained_mean = 0.0;
  double trained_mean = 0.0;
  std::size_t trained_min = 0;
  std::size_t training_steps = 0;
  /// Untrained average below 100 steps and every trained start balanced
  /// for eval_steps.
  bool passed = false;
};

/// Maps (previous angle, current angle) to the SOM's unit input square.
SomInput pole_input(double theta_prev, double theta, const PoleValidationOptions& opts);

/// Steps balanced by `map` from `start` before |theta| exceeds the fail
/// angle, capped at max_steps.
std::size_t balance_steps(const SomMap& map, CartPoleState start, std::size_t max_steps,
                          const PoleValidationOptions& opts);

/// Learning schedule defaults for the cart-pole task (force noise in N).
LearnParams pole_learn_params();

/// Trains a fresh 25x25 SOM against the reference controller and compares
/// balance time before and after.
ValidationReport pole_balance_validate(const LearnParams& lp, std::uint64_t seed,
                                       std::size_t episodes,
                                       const PoleValidationOptions& opts = {});

} // namespace aqmlab
