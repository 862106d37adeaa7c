#pragma once

// Background-walker crowds for load tests and demos.

#include "fva/nav/environment.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace fva::nav {

/// `n` walkers on a square lattice inside a walled room of half-width
/// `half_extent`, each cycling between its start and two random waypoints.
inline EnvironmentState crowd_environment(int n, double half_extent = 10.0, std::uint64_t seed = 1) {
  if (n < 1) throw NavError("crowd needs at least one walker");
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double inner = half_extent - 1.0;
  const double spacing = 2.0 * inner / side;
  if (spacing < 0.8) throw NavError("room too small for " + std::to_string(n) + " walkers");

  EnvironmentState env;
  const double h = half_extent, t = 0.2;
  env.obstacles = {Polygon::rect({-h - t, -h - t}, {h + t, -h}), Polygon::rect({-h - t, h}, {h + t, h + t}),
                   Polygon::rect({-h - t, -h}, {-h, h}), Polygon::rect({h, -h}, {h + t, h})};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-inner, inner);
  for (int i = 0; i < n; ++i) {
    AgentSpec a;
    a.id = "walker" + std::to_string(i);
    a.radius = 0.3;
    a.position = {-inner + spacing * (i % side + 0.5), -inner + spacing * (i / side + 0.5)};
    a.goals = {{coord(rng), coord(rng)}, {coord(rng), coord(rng)}, a.position};
    env.agents.push_back(std::move(a));
  }
  return env;
}

}  // namespace fva::nav
