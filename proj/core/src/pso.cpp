#include "combcast/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace combcast {

namespace {

constexpr int kMaxRedraws = 100;

void validate(const PsoConfig& config) {
  if (config.swarm_size < 2) throw std::invalid_argument("pso: swarm_size must be at least 2");
  if (config.iterations < 1) throw std::invalid_argument("pso: iterations must be positive");
  if (config.bounds.empty()) throw std::invalid_argument("pso: no dimensions");
  for (const auto& b : config.bounds) {
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || b.low > b.high) {
      throw std::invalid_argument("pso: bounds must be finite with low <= high");
    }
  }
  for (const auto& p : config.initial_positions) {
    if (p.size() != config.bounds.size()) throw std::invalid_argument("pso: initial position has wrong dimension");
  }
}

double evaluate(const Objective& objective, const std::vector<double>& x) {
  const double v = objective(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

PsoResult minimize(const Objective& objective, const PsoConfig& config) {
  validate(config);
  const std::size_t dims = config.bounds.size();
  const auto swarm = static_cast<std::size_t>(config.swarm_size);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto draw = [&](std::vector<double>& x) {
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& b = config.bounds[d];
      x[d] = b.low + unit(rng) * (b.high - b.low);
    }
  };

  std::vector<std::vector<double>> position(swarm, std::vector<double>(dims));
  std::vector<std::vector<double>> velocity(swarm, std::vector<double>(dims, 0.0));
  std::vector<double> value(swarm);

  for (std::size_t i = 0; i < swarm; ++i) {
    if (i < config.initial_positions.size()) {
      for (std::size_t d = 0; d < dims; ++d) {
        position[i][d] = std::clamp(config.initial_positions[i][d], config.bounds[d].low, config.bounds[d].high);
      }
    } else {
      draw(position[i]);
    }
    value[i] = evaluate(objective, position[i]);
    for (int retry = 0; !std::isfinite(value[i]); ++retry) {
      if (retry == kMaxRedraws) throw std::runtime_error("pso: objective not finite at any sampled initial position");
      draw(position[i]);
      value[i] = evaluate(objective, position[i]);
    }
  }

  auto personal_best = position;
  auto personal_value = value;
  std::size_t leader = static_cast<std::size_t>(std::min_element(value.begin(), value.end()) - value.begin());
  std::vector<double> global_best = position[leader];
  double global_value = value[leader];

  PsoResult result;
  result.trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
  result.trace.push_back(global_value);

  for (int iter = 0; iter < config.iterations; ++iter) {
    for (std::size_t i = 0; i < swarm; ++i) {
      auto& x = position[i];
      auto& v = velocity[i];
      for (std::size_t d = 0; d < dims; ++d) {
        const auto& b = config.bounds[d];
        const double range = b.high - b.low;
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        v[d] = config.inertia * v[d] + config.cognitive * r1 * (personal_best[i][d] - x[d]) +
               config.social * r2 * (global_best[d] - x[d]);
        v[d] = std::clamp(v[d], -range, range);
        x[d] += v[d];
        if (x[d] < b.low) {
          x[d] = b.low;
          v[d] = 0.0;
        } else if (x[d] > b.high) {
          x[d] = b.high;
          v[d] = 0.0;
        }
      }
      value[i] = evaluate(objective, x);
      if (value[i] < personal_value[i]) {
        personal_value[i] = value[i];
        personal_best[i] = x;
      }
    }
    // Synchronous global-best update keeps the run independent of particle visiting order.
    for (std::size_t i = 0; i < swarm; ++i) {
      if (personal_value[i] < global_value) {
        global_value = personal_value[i];
        global_best = personal_best[i];
      }
    }
    result.trace.push_back(global_value);
  }

  result.best_position = std::move(global_best);
  result.best_value = global_value;
  return result;
}

}  // namespace combcast
