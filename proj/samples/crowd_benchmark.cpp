// Headless crowd of background walkers; reports simulation throughput.
//   sample_crowd [agents] [ticks]

#include "fva/engine.hpp"
#include "fva/nav/crowd.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace fva;

int main(int argc, char** argv) {
  const int agents = argc > 1 ? std::atoi(argv[1]) : 50;
  const long ticks = argc > 2 ? std::atol(argv[2]) : 10000;
  try {
    engine::Simulation sim(canonical_script(), {}, nav::crowd_environment(agents),
                           std::make_shared<const motion::ClipStore>(motion::builtin_clip_store()),
                           builtin_gait_map());
    const auto t0 = std::chrono::steady_clock::now();
    for (long i = 0; i < ticks; ++i) sim.step();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d agents, %ld ticks: %.2f s wall, %.0f ticks/s (%.1fx real time at 60 Hz)\n", agents, ticks, s,
                ticks / s, ticks / s / 60.0);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
