#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace combcast {

struct Bounds {
  double low;
  double high;
};

struct PsoConfig {
  int swarm_size = 50;
  int iterations = 200;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  std::uint64_t seed = 0;
  /// One box per dimension; `low` may be 0 to enforce non-negativity.
  std::vector<Bounds> bounds;
  /// Optional starting points for the first particles (clamped to the box);
  /// the rest of the swarm is drawn uniformly.
  std::vector<std::vector<double>> initial_positions;
};

struct PsoResult {
  std::vector<double> best_position;
  double best_value;
  /// Global best value after initialization and after each iteration; non-increasing.
  std::vector<double> trace;
};

using Objective = std::function<double(std::span<const double>)>;

/// Global-best particle swarm minimization over a box.
///
/// Velocity update v <- inertia v + cognitive r1 (pbest - x) + social r2 (gbest - x);
/// positions leaving the box are clamped and the velocity in that dimension
/// is zeroed. The run is fully determined by `config` (including the seed).
/// Particles whose initial objective is non-finite are re-drawn up to 100
/// times before std::runtime_error; later non-finite values are never accepted.
PsoResult minimize(const Objective& objective, const PsoConfig& config);

}  // namespace combcast
