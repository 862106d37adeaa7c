#pragma once

// Reference implementations used only by the tests. Each one is written from
// the textbook definition and shares no code with the library.

#include "fva/geometry.hpp"
#include "fva/nav/environment.hpp"
#include "fva/nav/orca.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

// ---- grid shortest paths -----------------------------------------------------

/// Path length a + b*sqrt(2) kept as integers so comparisons are exact.
struct Octile {
  std::int64_t a{0};
  std::int64_t b{0};

  friend bool operator<(const Octile& x, const Octile& y) {
    // x.a + x.b r < y.a + y.b r  <=>  p < q r  with p = x.a - y.a, q = y.b - x.b
    const std::int64_t p = x.a - y.a;
    const std::int64_t q = y.b - x.b;
    if (q >= 0 && p <= 0) return !(p == 0 && q == 0);
    if (q <= 0 && p >= 0) return false;
    if (q > 0) return p * p < 2 * q * q;  // p > 0
    return p * p > 2 * q * q;             // q < 0, p < 0
  }
  friend bool operator==(const Octile&, const Octile&) = default;
};

/// Dijkstra over an 8-connected occupancy grid (row-major, 1 = blocked).
/// Diagonal steps need both adjacent cardinal cells free.
inline std::optional<Octile> dijkstra(const std::vector<std::uint8_t>& occ, int w, int h, int sx, int sy, int gx,
                                      int gy) {
  auto id = [w](int x, int y) { return static_cast<std::size_t>(y * w + x); };
  auto free = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && !occ[id(x, y)]; };
  if (!free(sx, sy) || !free(gx, gy)) return std::nullopt;
  std::vector<std::optional<Octile>> dist(occ.size());
  std::vector<bool> done(occ.size(), false);
  dist[id(sx, sy)] = Octile{};
  for (;;) {
    // O(V^2) selection keeps the oracle free of heap ordering subtleties.
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (done[i] || !dist[i]) continue;
      if (!best || *dist[i] < *dist[*best]) best = i;
    }
    if (!best) return std::nullopt;
    done[*best] = true;
    const int x = static_cast<int>(*best) % w;
    const int y = static_cast<int>(*best) / w;
    if (x == gx && y == gy) return dist[*best];
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        if (dx == 0 && dy == 0) continue;
        const int nx = x + dx, ny = y + dy;
        if (!free(nx, ny)) continue;
        const bool diag = dx != 0 && dy != 0;
        if (diag && (!free(x + dx, y) || !free(x, y + dy))) continue;
        Octile c = *dist[*best];
        (diag ? c.b : c.a) += 1;
        auto& d = dist[id(nx, ny)];
        if (!d || c < *d) d = c;
      }
    }
  }
}

// ---- segment vs convex polygon, exact ----------------------------------------

using Rational = boost::multiprecision::cpp_rational;

/// True when the open interior of the convex CCW polygon meets segment a-b.
/// Every double converts to a rational exactly, so there is no rounding.
inline bool segment_hits_interior(const std::vector<fva::Vec2>& poly, fva::Vec2 a, fva::Vec2 b) {
  const Rational ax(a.x), ay(a.y), dx = Rational(b.x) - ax, dy = Rational(b.y) - ay;
  Rational lo = 0, hi = 1;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Rational px(poly[i].x), py(poly[i].y);
    const Rational ex = Rational(poly[(i + 1) % n].x) - px, ey = Rational(poly[(i + 1) % n].y) - py;
    // strictly inside edge i: cross(e, p(t) - v_i) > 0, i.e. alpha + beta t > 0
    const Rational alpha = ex * (ay - py) - ey * (ax - px);
    const Rational beta = ex * dy - ey * dx;
    if (beta == 0) {
      if (alpha <= 0) return false;
      continue;
    }
    const Rational t = -alpha / beta;
    if (beta > 0) lo = std::max(lo, t);
    else hi = std::min(hi, t);
  }
  // Open constraints: a single shared endpoint is not interior.
  return lo < hi || (dx == 0 && dy == 0);
}

// ---- Friedman from rank definitions -----------------------------------------

/// Chi-square statistic with tie correction; ranks are counted directly
/// (1 + number smaller + half the other equal values).
inline double friedman_chi2(const std::vector<std::vector<double>>& rows) {
  const double n = static_cast<double>(rows.size());
  const std::size_t k = rows.front().size();
  std::vector<double> rsum(k, 0.0);
  double tie_term = 0.0;
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < k; ++j) {
      double less = 0, equal = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (row[i] < row[j]) less += 1;
        else if (row[i] == row[j] && i != j) equal += 1;
      }
      rsum[j] += 1.0 + less + equal / 2.0;
    }
    std::vector<double> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < k;) {
      std::size_t e = i;
      while (e < k && sorted[e] == sorted[i]) ++e;
      const double t = static_cast<double>(e - i);
      tie_term += t * t * t - t;
      i = e;
    }
  }
  const double kd = static_cast<double>(k);
  double s = 0.0;
  for (double r : rsum) s += r * r;
  const double chi2 = 12.0 / (n * kd * (kd + 1.0)) * s - 3.0 * n * (kd + 1.0);
  const double c = 1.0 - tie_term / (n * kd * (kd * kd - 1.0));
  if (c <= 0.0) return 0.0;
  return chi2 / c;
}

// ---- BVH generation and an independent reader -------------------------------

struct GeneratedBvh {
  std::string text;
  std::size_t joints{0};
  std::size_t frames{0};
  std::size_t channels{0};
  std::vector<std::vector<double>> values;  // raw file values
};

/// Random skeleton with `joints` joints (root has 6 channels, others 3) and
/// `frames` frames of values with at most 6 decimals.
inline GeneratedBvh generate_bvh(std::mt19937_64& rng, std::size_t joints, std::size_t frames) {
  std::uniform_real_distribution<double> off(-30.0, 30.0);
  std::uniform_real_distribution<double> ang(-179.0, 179.0);
  std::uniform_int_distribution<int> order(0, 5);
  const char* orders[6] = {"Zrotation Xrotation Yrotation", "Xrotation Yrotation Zrotation",
                           "Yrotation Zrotation Xrotation", "Zrotation Yrotation Xrotation",
                           "Xrotation Zrotation Yrotation", "Yrotation Xrotation Zrotation"};
  auto q = [](double v) { return std::round(v * 1e6) / 1e6; };

  // Random tree: each joint hangs off an earlier one.
  std::vector<int> parent(joints, -1);
  for (std::size_t i = 1; i < joints; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    parent[i] = static_cast<int>(pick(rng));
  }
  std::vector<std::vector<std::size_t>> kids(joints);
  for (std::size_t i = 1; i < joints; ++i) kids[static_cast<std::size_t>(parent[i])].push_back(i);

  std::ostringstream out;
  out.precision(17);
  GeneratedBvh g;
  g.joints = joints;
  g.frames = frames;
  std::size_t name_no = 0;
  std::function<void(std::size_t, int)> emit = [&](std::size_t j, int depth) {
    const std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
    out << ind << (j == 0 ? "ROOT" : "JOINT") << " j" << name_no++ << "\n" << ind << "{\n";
    out << ind << "  OFFSET " << q(off(rng)) << " " << q(off(rng)) << " " << q(off(rng)) << "\n";
    if (j == 0) {
      out << ind << "  CHANNELS 6 Xposition Yposition Zposition " << orders[order(rng)] << "\n";
      g.channels += 6;
    } else {
      out << ind << "  CHANNELS 3 " << orders[order(rng)] << "\n";
      g.channels += 3;
    }
    if (kids[j].empty()) {
      out << ind << "  End Site\n" << ind << "  {\n" << ind << "    OFFSET 0 " << q(off(rng)) << " 0\n"
          << ind << "  }\n";
    }
    for (auto c : kids[j]) emit(c, depth + 1);
    out << ind << "}\n";
  };
  out << "HIERARCHY\n";
  emit(0, 0);
  out << "MOTION\nFrames: " << frames << "\nFrame Time: 0.008333\n";
  for (std::size_t f = 0; f < frames; ++f) {
    std::vector<double> row;
    for (std::size_t c = 0; c < g.channels; ++c) {
      row.push_back(q(c < 3 ? off(rng) : ang(rng)));
      out << (c ? " " : "") << row.back();
    }
    out << "\n";
    g.values.push_back(std::move(row));
  }
  g.text = out.str();
  return g;
}

struct BvhCounts {
  std::size_t joints{0};
  std::size_t channels{0};
  std::size_t frames_declared{0};
  std::size_t data_rows{0};
};

/// Token counting: ROOT/JOINT keywords, CHANNELS totals and non-empty lines
/// after the frame time line.
inline BvhCounts count_bvh(const std::string& text) {
  BvhCounts c;
  std::istringstream in(text);
  std::string line;
  bool motion = false, data = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string w;
    if (!(ls >> w)) continue;
    if (data) {
      ++c.data_rows;
      continue;
    }
    if (w == "ROOT" || w == "JOINT") ++c.joints;
    if (w == "CHANNELS") {
      std::size_t n = 0;
      ls >> n;
      c.channels += n;
    }
    if (w == "MOTION") motion = true;
    if (motion && w == "Frames:") ls >> c.frames_declared;
    if (motion && w == "Frame") data = true;
  }
  return c;
}

// ---- antipodal circle crossing -----------------------------------------------

struct CircleRun {
  double min_distance{std::numeric_limits<double>::infinity()};
  double max_goal_error{0.0};
  double seconds{0.0};
  bool all_arrived{false};
  bool all_feasible{true};
};

/// N discs on a circle swap to the antipodal points under ORCA with the
/// keep-right preferred velocity; an agent counts as arrived within
/// `tolerance` of its goal.
inline CircleRun antipodal_circle(int n, double circle_radius, double agent_radius, double pref_speed, double dt,
                                  double time_limit, double tolerance = 0.1) {
  struct A {
    fva::Vec2 p, v, goal;
  };
  std::vector<A> agents;
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n;
    const fva::Vec2 p{circle_radius * std::cos(th), circle_radius * std::sin(th)};
    agents.push_back({p, {}, -p});
  }
  fva::nav::OrcaParams params;
  fva::nav::ObstacleSet none;
  CircleRun run;
  const auto steps = static_cast<long>(std::llround(time_limit / dt));
  for (long s = 0; s <= steps; ++s) {
    for (std::size_t i = 0; i < agents.size(); ++i) {
      for (std::size_t j = i + 1; j < agents.size(); ++j) {
        run.min_distance = std::min(run.min_distance, fva::length(agents[i].p - agents[j].p));
      }
    }
    bool arrived = true;
    double worst = 0.0;
    for (const auto& a : agents) {
      worst = std::max(worst, fva::length(a.goal - a.p));
      arrived = arrived && fva::length(a.goal - a.p) <= tolerance;
    }
    run.max_goal_error = worst;
    run.seconds = static_cast<double>(s) * dt;
    if (arrived) {
      run.all_arrived = true;
      break;
    }
    if (s == steps) break;
    std::vector<fva::Vec2> next(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const auto& a = agents[i];
      const fva::nav::Disc self{a.p, a.v, agent_radius, pref_speed};
      std::vector<fva::nav::Neighbor> nbs;
      for (std::size_t j = 0; j < agents.size(); ++j) {
        if (j == i) continue;
        nbs.push_back({{agents[j].p, agents[j].v, agent_radius, pref_speed}, 0.5});
      }
      const auto pref = fva::nav::keep_right(fva::nav::goal_velocity(a.p, a.goal, pref_speed, dt), self, nbs, params);
      const auto res = fva::nav::orca_solve(self, nbs, none, pref, params, dt);
      run.all_feasible = run.all_feasible && res.feasible;
      next[i] = res.velocity;
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
      agents[i].v = next[i];
      agents[i].p += next[i] * dt;
    }
  }
  return run;
}

}  // namespace oracle
