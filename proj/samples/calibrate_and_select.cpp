// Aggregates a ratings CSV into gait friendliness values and shows which gait
// each desired friendliness level would use.
//   sample_calibrate [ratings.csv]

#include "fva/friendliness.hpp"

#include <cstdio>

using namespace fva;

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : FVA_DATA_DIR "/fixtures/ratings_study_gaits.csv";
  try {
    const auto map = aggregate_ratings(parse_ratings_csv(read_text_file(path)));
    for (const auto& e : map.entries()) std::printf("%-8s f = %.4f\n", e.gait_id.c_str(), e.f);
    std::printf("\n f_des  gait      hand    head     gaze\n");
    for (double f : {0.0, 0.2, 0.4, 0.5, 0.7, 0.97, 1.0}) {
      const Friendliness fd(f);
      std::printf(" %.2f   %-8s  %-6s  %-7s  %s\n", f, select_gait(map, fd).c_str(),
                  std::string(to_string(hand_gesture_mode(fd))).c_str(),
                  std::string(to_string(head_gesture_mode(fd))).c_str(), gaze_flag(fd) ? "on" : "off");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
