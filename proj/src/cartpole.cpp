#include "aqmlab/cartpole.hpp"

#include "aqmlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aqmlab {

CartPoleState cartpole_step(const CartPoleState& s, double force, const CartPoleParams& p) {
  const double total = p.m_cart + p.m_pole;
  const double pole_ml = p.m_pole * p.half_length;
  const double cos_t = std::cos(s.theta);
  const double sin_t = std::sin(s.theta);
  const double temp = (force + pole_ml * s.theta_dot * s.theta_dot * sin_t) / total;
  const double theta_acc = (p.gravity * sin_t - cos_t * temp) /
                           (p.half_length * (4.0 / 3.0 - p.m_pole * cos_t * cos_t / total));
  const double x_acc = temp - pole_ml * theta_acc * cos_t / total;

  CartPoleState next;
  next.x = s.x + p.dt * s.x_dot;
  next.x_dot = s.x_dot + p.dt * x_acc;
  next.theta = s.theta + p.dt * s.theta_dot;
  next.theta_dot = s.theta_dot + p.dt * theta_acc;
  return next;
}

SomInput pole_input(double theta_prev, double theta, const PoleValidationOptions& opts) {
  auto norm = [&](double a) { return std::clamp(0.5 + a / (2.0 * opts.input_angle_range), 0.0, 1.0); };
  return {norm(theta_prev), norm(theta)};
}

namespace {

double teacher_force(double theta_prev, double theta, const PoleValidationOptions& opts) {
  const double rate = (theta - theta_prev) / opts.plant.dt;
  const double f = opts.teacher.k_angle * theta + opts.teacher.k_rate * rate;
  return std::clamp(f, -opts.plant.force_mag, opts.plant.force_mag);
}

CartPoleState random_start(Rng& rng, const PoleValidationOptions& opts) {
  CartPoleState s;
  s.theta = rng.uniform(-opts.start_angle, opts.start_angle);
  return s;
}

double mean_of(const std::vector<std::size_t>& v) {
  if (v.empty()) return 0.0;
  return static_cast<double>(std::accumulate(v.begin(), v.end(), std::size_t{0})) /
         static_cast<double>(v.size());
}

} // namespace

std::size_t balance_steps(const SomMap& map, CartPoleState start, std::size_t max_steps,
                          const PoleValidationOptions& opts) {
  CartPoleState s = start;
  double prev = s.theta;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const double force = map.respond(pole_input(prev, s.theta, opts));
    prev = s.theta;
    s = cartpole_step(s, force, opts.plant);
    if (std::abs(s.theta) > opts.plant.fail_angle) return step;
  }
  return max_steps;
}

LearnParams pole_learn_params() {
  LearnParams lp;
  lp.eta_in = 0.3;
  lp.eta_out = 0.3;
  lp.radius = 6.0;
  lp.decay = 0.9995;
  lp.eta_floor = 0.01;
  lp.radius_floor = 1.0;
  lp.explore_sigma = 2.0;
  return lp;
}

ValidationReport pole_balance_validate(const LearnParams& lp, std::uint64_t seed,
                                       std::size_t episodes, const PoleValidationOptions& opts) {
  lp.validate();
  const double fmax = opts.plant.force_mag;
  Rng init_rng = Rng::stream(seed, 1);
  SomMap map = SomMap::random(opts.side, opts.side, init_rng, -fmax, fmax, OutputRange{-fmax, fmax});

  ValidationReport report;
  Rng eval_rng = Rng::stream(seed, 2);
  std::vector<CartPoleState> starts;
  for (std::size_t i = 0; i < opts.eval_starts; ++i) starts.push_back(random_start(eval_rng, opts));

  for (const auto& s : starts) report.untrained_steps.push_back(balance_steps(map, s, opts.eval_steps, opts));

  Rng train_rng = Rng::stream(seed, 3);
  LearnParams sched = lp;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    CartPoleState s = random_start(train_rng, opts);
    double prev = s.theta;
    for (std::size_t step = 0; step < opts.train_steps_per_episode; ++step) {
      const double target = teacher_force(prev, s.theta, opts);
      map.train_step(pole_input(prev, s.theta, opts), target, sched);
      sched = sched.decayed();
      ++report.training_steps;
      const double applied = std::clamp(target + train_rng.normal(0.0, lp.explore_sigma), -fmax, fmax);
      prev = s.theta;
      s = cartpole_step(s, applied, opts.plant);
      if (std::abs(s.theta) > opts.plant.fail_angle) break;
    }
  }
  map.freeze();

  for (const auto& s : starts) report.trained_steps.push_back(balance_steps(map, s, opts.eval_steps, opts));

  report.untrained_mean = mean_of(report.untrained_steps);
  report.trained_mean = mean_of(report.trained_steps);
  report.trained_min = report.trained_steps.empty()
                           ? 0
                           : *std::min_element(report.trained_steps.begin(), report.trained_steps.end());
  report.passed = report.untrained_mean < 100.0 && report.trained_min >= opts.eval_steps;
  return report;
}

} // namespace aqmlab
