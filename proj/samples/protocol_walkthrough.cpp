// Runs the seven-task protocol once per agent variant and prints what each
// agent says and does.

#include "fva/engine.hpp"

#include <cstdio>

using namespace fva;

int main() {
  const auto script = canonical_script();
  for (const auto& profile : {fva_profile(), default_profile()}) {
    engine::ProfileMap profiles;
    profiles.fallback = profile;
    engine::RunOptions opts;
    opts.snapshot_stride = 0;
    opts.auto_operator_delay = 1.0;
    const auto res = engine::run_scenario(script, profiles, nav::canonical_environment(), {}, 42, opts);
    std::printf("== %s (f_des %.2f, gait %s)\n", profile.model_id.c_str(), profile.f_des.value(),
                select_gait(builtin_gait_map(), profile.f_des).c_str());
    for (const auto& e : res.log) {
      const double t = static_cast<double>(e.tick) / 60.0;
      if (e.kind == engine::LogKind::Response) std::printf("%7.2f s  says     %s\n", t, e.text.c_str());
      if (e.kind == engine::LogKind::Gesture) std::printf("%7.2f s  gesture  %s (%s)\n", t, e.name.c_str(), e.text.c_str());
    }
    std::printf("finished after %lld ticks\n\n", static_cast<long long>(res.ticks));
  }
}
