#pragma once

// Optimal reciprocal collision avoidance for disc agents. Each neighbour and
// nearby obstacle edge contributes a half-plane of permitted velocities; the
// new velocity is the point of their intersection (inside the max-speed
// circle) closest to the preferred velocity, solved as a 2D linear program.
// When the program is infeasible, the velocity minimizing the largest
// violation of the agent constraints is returned instead.

#include "fva/nav/environment.hpp"

#include <span>

namespace fva::nav {

/// Directed line; permitted velocities lie on its left.
struct OrcaLine {
  Vec2 point;
  Vec2 direction;
};

struct OrcaParams {
  double time_horizon{2.0};
  double time_horizon_obst{1.0};
  double neighbor_dist{5.0};
  std::size_t max_neighbors{10};
  double keep_right{deg_to_rad(15.0)};  // see keep_right()
};

/// Disc in velocity-space terms: position, current velocity, radius.
struct Disc {
  Vec2 position;
  Vec2 velocity;
  double radius{0.3};
  double max_speed{1.5};
};

/// A neighbour and the share of avoidance this agent takes on (0.5 for
/// reciprocating agents, 1 for non-responsive ones such as the user).
struct Neighbor {
  Disc disc;
  double responsibility{0.5};
};

/// Obstacle vertex in the linked edge representation: each vertex knows the
/// next one (counterclockwise), the unit direction to it, and convexity.
struct ObstacleVertex {
  Vec2 point;
  Vec2 unit_dir;
  std::size_t next{0};
  std::size_t prev{0};
  bool convex{true};
};

/// Flattened obstacle edges for ORCA queries.
class ObstacleSet {
 public:
  ObstacleSet() = default;
  explicit ObstacleSet(std::span<const Polygon> polygons) {
    for (const auto& poly : polygons) {
      const auto& v = poly.vertices();
      const std::size_t base = verts_.size();
      const std::size_t n = v.size();
      for (std::size_t i = 0; i < n; ++i) {
        ObstacleVertex ov;
        ov.point = v[i];
        ov.next = base + (i + 1) % n;
        ov.prev = base + (i + n - 1) % n;
        ov.unit_dir = normalize(v[(i + 1) % n] - v[i]);
        ov.convex = left_of(v[(i + n - 1) % n], v[i], v[(i + 1) % n]) >= 0.0;
        verts_.push_back(ov);
      }
    }
  }

  const std::vector<ObstacleVertex>& vertices() const { return verts_; }
  bool empty() const { return verts_.empty(); }

  /// Edges (by start vertex) facing `p` within `range`, nearest first.
  std::vector<std::size_t> edges_near(Vec2 p, double range) const {
    std::vector<std::pair<double, std::size_t>> found;
    const double range_sq = range * range;
    for (std::size_t i = 0; i < verts_.size(); ++i) {
      const Vec2 a = verts_[i].point;
      const Vec2 b = verts_[verts_[i].next].point;
      if (left_of(a, b, p) >= 0.0) continue;  // behind the edge
      const double d = dist_sq_point_segment(a, b, p);
      if (d < range_sq) found.emplace_back(d, i);
    }
    std::stable_sort(found.begin(), found.end(),
                     [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<std::size_t> out;
    out.reserve(found.size());
    for (auto& f : found) out.push_back(f.second);
    return out;
  }

 private:
  std::vector<ObstacleVertex> verts_;
};

namespace detail {

inline constexpr double kEps = 1e-9;

inline bool lp1(std::span<const OrcaLine> lines, std::size_t line_no, double radius, Vec2 opt,
                bool direction_opt, Vec2& result) {
  const OrcaLine& L = lines[line_no];
  const double dp = dot(L.point, L.direction);
  const double disc = dp * dp + radius * radius - abs_sq(L.point);
  if (disc < 0.0) return false;
  const double sq = std::sqrt(disc);
  double t_left = -dp - sq;
  double t_right = -dp + sq;
  for (std::size_t i = 0; i < line_no; ++i) {
    const double denom = det(L.direction, lines[i].direction);
    const double numer = det(lines[i].direction, L.point - lines[i].point);
    if (std::abs(denom) <= kEps) {
      if (numer < 0.0) return false;
      continue;
    }
    const double t = numer / denom;
    if (denom >= 0.0) t_right = std::min(t_right, t);
    else t_left = std::max(t_left, t);
    if (t_left > t_right) return false;
  }
  if (direction_opt) {
    result = dot(opt, L.direction) > 0.0 ? L.point + t_right * L.direction : L.point + t_left * L.direction;
  } else {
    const double t = dot(L.direction, opt - L.point);
    if (t < t_left) result = L.point + t_left * L.direction;
    else if (t > t_right) result = L.point + t_right * L.direction;
    else result = L.point + t * L.direction;
  }
  return true;
}

inline std::size_t lp2(std::span<const OrcaLine> lines, double radius, Vec2 opt, bool direction_opt,
                       Vec2& result) {
  if (direction_opt) result = opt * radius;
  else if (abs_sq(opt) > radius * radius) result = normalize(opt) * radius;
  else result = opt;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) > 0.0) {
      const Vec2 temp = result;
      if (!lp1(lines, i, radius, opt, direction_opt, result)) {
        result = temp;
        return i;
      }
    }
  }
  return lines.size();
}

inline void lp3(std::span<const OrcaLine> lines, std::size_t num_obst, std::size_t begin, double radius,
                Vec2& result) {
  double distance = 0.0;
  for (std::size_t i = begin; i < lines.size(); ++i) {
    if (det(lines[i].direction, lines[i].point - result) <= distance) continue;
    std::vector<OrcaLine> proj(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(num_obst));
    for (std::size_t j = num_obst; j < i; ++j) {
      OrcaLine line;
      const double d = det(lines[i].direction, lines[j].direction);
      if (std::abs(d) <= kEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
        line.point = 0.5 * (lines[i].point + lines[j].point);
      } else {
        line.point = lines[i].point + (det(lines[j].direction, lines[i].point - lines[j].point) / d) * lines[i].direction;
      }
      line.direction = normalize(lines[j].direction - lines[i].direction);
      proj.push_back(line);
    }
    const Vec2 temp = result;
    if (lp2(proj, radius, Vec2{-lines[i].direction.y, lines[i].direction.x}, true, result) < proj.size()) {
      result = temp;  // numerical failure; keep the previous point
    }
    distance = det(lines[i].direction, lines[i].point - result);
  }
}

inline Vec2 left_tangent(Vec2 rel, double leg, double r, double dist_sq) {
  return Vec2{rel.x * leg - rel.y * r, rel.x * r + rel.y * leg} / dist_sq;
}

inline Vec2 right_tangent(Vec2 rel, double leg, double r, double dist_sq) {
  return Vec2{rel.x * leg + rel.y * r, -rel.x * r + rel.y * leg} / dist_sq;
}

}  // namespace detail

/// Half-planes contributed by obstacle edges near `self`.
inline void obstacle_lines(const Disc& self, const ObstacleSet& obstacles, const OrcaParams& params,
                           std::vector<OrcaLine>& lines) {
  if (obstacles.empty()) return;
  const auto& V = obstacles.vertices();
  const double inv_tau = 1.0 / params.time_horizon_obst;
  const double range = params.time_horizon_obst * self.max_speed + self.radius;
  const double r = self.radius;
  const double r_sq = r * r;
  const Vec2 vel = self.velocity;

  for (std::size_t edge : obstacles.edges_near(self.position, range)) {
    const ObstacleVertex* o1 = &V[edge];
    const ObstacleVertex* o2 = &V[o1->next];
    const Vec2 rel1 = o1->point - self.position;
    const Vec2 rel2 = o2->point - self.position;

    bool covered = false;
    for (const auto& l : lines) {
      if (det(inv_tau * rel1 - l.point, l.direction) - inv_tau * r >= -detail::kEps &&
          det(inv_tau * rel2 - l.point, l.direction) - inv_tau * r >= -detail::kEps) {
        covered = true;
        break;
      }
    }
    if (covered) continue;

    const double d1 = abs_sq(rel1);
    const double d2 = abs_sq(rel2);
    const Vec2 ov = o2->point - o1->point;
    const double s = dot(-rel1, ov) / abs_sq(ov);
    const double d_line = abs_sq(-rel1 - s * ov);

    if (s < 0.0 && d1 <= r_sq) {
      if (o1->convex) lines.push_back({{0, 0}, normalize(Vec2{-rel1.y, rel1.x})});
      continue;
    }
    if (s > 1.0 && d2 <= r_sq) {
      if (o2->convex && det(rel2, o2->unit_dir) >= 0.0) lines.push_back({{0, 0}, normalize(Vec2{-rel2.y, rel2.x})});
      continue;
    }
    if (s >= 0.0 && s < 1.0 && d_line <= r_sq) {
      lines.push_back({{0, 0}, -o1->unit_dir});
      continue;
    }

    Vec2 left_leg;
    Vec2 right_leg;
    if (s < 0.0 && d_line <= r_sq) {
      if (!o1->convex) continue;
      o2 = o1;
      const double leg = std::sqrt(d1 - r_sq);
      left_leg = detail::left_tangent(rel1, leg, r, d1);
      right_leg = detail::right_tangent(rel1, leg, r, d1);
    } else if (s > 1.0 && d_line <= r_sq) {
      if (!o2->convex) continue;
      o1 = o2;
      const double leg = std::sqrt(d2 - r_sq);
      left_leg = detail::left_tangent(rel2, leg, r, d2);
      right_leg = detail::right_tangent(rel2, leg, r, d2);
    } else {
      if (o1->convex) {
        const double leg = std::sqrt(d1 - r_sq);
        left_leg = detail::left_tangent(rel1, leg, r, d1);
      } else {
        left_leg = -o1->unit_dir;
      }
      if (o2->convex) {
        const double leg = std::sqrt(d2 - r_sq);
        right_leg = detail::right_tangent(rel2, leg, r, d2);
      } else {
        right_leg = o1->unit_dir;
      }
    }

    const ObstacleVertex* left_nb = &V[o1->prev];
    bool left_foreign = false;
    bool right_foreign = false;
    if (o1->convex && det(left_leg, -left_nb->unit_dir) >= 0.0) {
      left_leg = -left_nb->unit_dir;
      left_foreign = true;
    }
    if (o2->convex && det(right_leg, o2->unit_dir) <= 0.0) {
      right_leg = o2->unit_dir;
      right_foreign = true;
    }

    const Vec2 left_cut = inv_tau * (o1->point - self.position);
    const Vec2 right_cut = inv_tau * (o2->point - self.position);
    const Vec2 cut_vec = right_cut - left_cut;
    const bool same = o1 == o2;
    const double t = same ? 0.5 : dot(vel - left_cut, cut_vec) / abs_sq(cut_vec);
    const double t_left = dot(vel - left_cut, left_leg);
    const double t_right = dot(vel - right_cut, right_leg);

    if ((t < 0.0 && t_left < 0.0) || (same && t_left < 0.0 && t_right < 0.0)) {
      const Vec2 w = normalize(vel - left_cut);
      lines.push_back({left_cut + r * inv_tau * w, {w.y, -w.x}});
      continue;
    }
    if (t > 1.0 && t_right < 0.0) {
      const Vec2 w = normalize(vel - right_cut);
      lines.push_back({right_cut + r * inv_tau * w, {w.y, -w.x}});
      continue;
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    const double dist_cut = (t < 0.0 || t > 1.0 || same) ? inf : abs_sq(vel - (left_cut + t * cut_vec));
    const double dist_left = t_left < 0.0 ? inf : abs_sq(vel - (left_cut + t_left * left_leg));
    const double dist_right = t_right < 0.0 ? inf : abs_sq(vel - (right_cut + t_right * right_leg));

    if (dist_cut <= dist_left && dist_cut <= dist_right) {
      const Vec2 dir = -o1->unit_dir;
      lines.push_back({left_cut + r * inv_tau * Vec2{-dir.y, dir.x}, dir});
    } else if (dist_left <= dist_right) {
      if (left_foreign) continue;
      lines.push_back({left_cut + r * inv_tau * Vec2{-left_leg.y, left_leg.x}, left_leg});
    } else {
      if (right_foreign) continue;
      const Vec2 dir = -right_leg;
      lines.push_back({right_cut + r * inv_tau * Vec2{-dir.y, dir.x}, dir});
    }
  }
}

/// Half-plane induced by one neighbouring disc.
inline OrcaLine agent_line(const Disc& self, const Neighbor& nb, double time_horizon, double dt) {
  const Vec2 rel_pos = nb.disc.position - self.position;
  const Vec2 rel_vel = self.velocity - nb.disc.velocity;
  const double dist_sq = abs_sq(rel_pos);
  const double comb_r = self.radius + nb.disc.radius;
  const double comb_r_sq = comb_r * comb_r;
  const double inv_tau = 1.0 / time_horizon;
  OrcaLine line;
  Vec2 u;
  if (dist_sq > comb_r_sq) {
    const Vec2 w = rel_vel - inv_tau * rel_pos;
    const double w_len_sq = abs_sq(w);
    const double dp1 = dot(w, rel_pos);
    if (dp1 < 0.0 && dp1 * dp1 > comb_r_sq * w_len_sq) {
      const double w_len = std::sqrt(w_len_sq);
      const Vec2 unit_w = w / w_len;
      line.direction = {unit_w.y, -unit_w.x};
      u = (comb_r * inv_tau - w_len) * unit_w;
    } else {
      const double leg = std::sqrt(dist_sq - comb_r_sq);
      if (det(rel_pos, w) > 0.0) {
        line.direction = detail::left_tangent(rel_pos, leg, comb_r, dist_sq);
      } else {
        line.direction = -detail::right_tangent(rel_pos, leg, comb_r, dist_sq);
      }
      u = dot(rel_vel, line.direction) * line.direction - rel_vel;
    }
  } else {
    // Already overlapping: resolve within one time step.
    const double inv_dt = 1.0 / dt;
    const Vec2 w = rel_vel - inv_dt * rel_pos;
    const double w_len = length(w);
    const Vec2 unit_w = w_len > 0.0 ? w / w_len : Vec2{1.0, 0.0};
    line.direction = {unit_w.y, -unit_w.x};
    u = (comb_r * inv_dt - w_len) * unit_w;
  }
  line.point = self.velocity + nb.responsibility * u;
  return line;
}

struct OrcaResult {
  Vec2 velocity;
  bool feasible{true};
  std::vector<OrcaLine> lines;
  std::size_t obstacle_lines{0};
};

/// Full ORCA solve with the constructed constraints exposed for inspection.
inline OrcaResult orca_solve(const Disc& self, std::span<const Neighbor> neighbors,
                             const ObstacleSet& obstacles, Vec2 pref_velocity, const OrcaParams& params,
                             double dt) {
  OrcaResult res;
  obstacle_lines(self, obstacles, params, res.lines);
  res.obstacle_lines = res.lines.size();

  std::vector<std::pair<double, std::size_t>> order;
  const double nd_sq = params.neighbor_dist * params.neighbor_dist;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const double d = abs_sq(neighbors[i].disc.position - self.position);
    if (d < nd_sq) order.emplace_back(d, i);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (order.size() > params.max_neighbors) order.resize(params.max_neighbors);
  for (const auto& [d, i] : order) res.lines.push_back(agent_line(self, neighbors[i], params.time_horizon, dt));

  const std::size_t fail = detail::lp2(res.lines, self.max_speed, pref_velocity, false, res.velocity);
  if (fail < res.lines.size()) {
    res.feasible = false;
    detail::lp3(res.lines, res.obstacle_lines, fail, self.max_speed, res.velocity);
  }
  // The LP keeps the result on the max-speed circle; guard against rounding.
  const double speed = length(res.velocity);
  if (speed > self.max_speed) res.velocity = res.velocity * (self.max_speed / speed);
  return res;
}

/// Goal-seeking velocity at `speed`, shortened near `target` so one step of
/// `dt` lands on it.
inline Vec2 goal_velocity(Vec2 position, Vec2 target, double speed, double dt) {
  const Vec2 to = target - position;
  const double d = length(to);
  if (d <= 0.0) return {};
  return to * (std::min(speed, d / dt) / d);
}

/// Turns `pref` clockwise by `params.keep_right` while any neighbour within
/// the query radius is closing in, so agents in a crowd pass on a common side.
inline Vec2 keep_right(Vec2 pref, const Disc& self, std::span<const Neighbor> neighbors, const OrcaParams& params) {
  const double nd_sq = params.neighbor_dist * params.neighbor_dist;
  for (const auto& nb : neighbors) {
    const Vec2 rel = nb.disc.position - self.position;
    if (abs_sq(rel) < nd_sq && dot(rel, self.velocity - nb.disc.velocity) > 0.0) {
      return rotate(pref, -params.keep_right);
    }
  }
  return pref;
}

/// Collision-avoiding velocity closest to `pref_velocity`.
inline Vec2 orca_velocity(const Disc& self, std::span<const Neighbor> neighbors, const ObstacleSet& obstacles,
                          Vec2 pref_velocity, const OrcaParams& params, double dt) {
  return orca_solve(self, neighbors, obstacles, pref_velocity, params, dt).velocity;
}

}  // namespace fva::nav
