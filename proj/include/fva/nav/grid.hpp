#pragma once

#include "fva/nav/environment.hpp"

#include <array>
#include <cstdint>
#include <numbers>
#include <queue>
#include <span>
#include <utility>

namespace fva::nav {

struct Cell {
  int x{0};
  int y{0};
  bool operator==(const Cell&) const = default;
};

/// Occupancy raster of the static obstacles inflated by the agent radius.
class NavGrid {
 public:
  NavGrid() = default;

  NavGrid(Vec2 origin, double cell_size, int width, int height, std::vector<std::uint8_t> blocked,
          double inflation = 0.0)
      : origin_(origin), cell_size_(cell_size), width_(width), height_(height),
        blocked_(std::move(blocked)), inflation_(inflation) {
    if (!(cell_size_ > 0.0)) throw NavError("cell_size must be positive");
    if (width_ <= 0 || height_ <= 0) throw NavError("grid must have positive extent");
    if (blocked_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      throw NavError("occupancy size does not match grid extent");
    }
  }

  /// Rasterizes `obstacles` over the rectangle [lo, hi]. A cell is blocked when
  /// its center lies within `inflation` of an obstacle.
  static NavGrid rasterize(std::span<const Polygon> obstacles, Vec2 lo, Vec2 hi, double cell_size,
                           double inflation) {
    if (!(cell_size > 0.0)) throw NavError("cell_size must be positive");
    const int w = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell_size)));
    const int h = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell_size)));
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const Vec2 c{lo.x + (x + 0.5) * cell_size, lo.y + (y + 0.5) * cell_size};
        for (const auto& p : obstacles) {
          if (p.distance(c) <= inflation) {
            occ[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = 1;
            break;
          }
        }
      }
    }
    return NavGrid(lo, cell_size, w, h, std::move(occ), inflation);
  }

  Vec2 origin() const { return origin_; }
  double cell_size() const { return cell_size_; }
  double inflation() const { return inflation_; }
  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }

  bool blocked(Cell c) const {
    return !in_bounds(c) || blocked_[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
                                     static_cast<std::size_t>(c.x)] != 0;
  }

  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.x);
  }

  Cell cell_of(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / cell_size_)),
            static_cast<int>(std::floor((p.y - origin_.y) / cell_size_))};
  }

  Vec2 center(Cell c) const {
    return {origin_.x + (c.x + 0.5) * cell_size_, origin_.y + (c.y + 0.5) * cell_size_};
  }

  /// True when every cell touched by segment a-b is free. Where the segment
  /// passes exactly through a cell corner both side cells must be free.
  bool segment_free(Vec2 a, Vec2 b) const {
    const double ax = (a.x - origin_.x) / cell_size_;
    const double ay = (a.y - origin_.y) / cell_size_;
    const double bx = (b.x - origin_.x) / cell_size_;
    const double by = (b.y - origin_.y) / cell_size_;
    Cell c{static_cast<int>(std::floor(ax)), static_cast<int>(std::floor(ay))};
    const Cell end{static_cast<int>(std::floor(bx)), static_cast<int>(std::floor(by))};
    if (blocked(c) || blocked(end)) return false;
    const double dx = bx - ax;
    const double dy = by - ay;
    const int sx = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
    const int sy = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
    constexpr double inf = std::numeric_limits<double>::infinity();
    double t_max_x = sx > 0 ? (c.x + 1 - ax) / dx : (sx < 0 ? (ax - c.x) / -dx : inf);
    double t_max_y = sy > 0 ? (c.y + 1 - ay) / dy : (sy < 0 ? (ay - c.y) / -dy : inf);
    const double t_dx = sx != 0 ? 1.0 / std::abs(dx) : inf;
    const double t_dy = sy != 0 ? 1.0 / std::abs(dy) : inf;
    const int limit = std::abs(end.x - c.x) + std::abs(end.y - c.y) + 2;
    for (int step = 0; step < limit && !(c == end); ++step) {
      if (std::abs(t_max_x - t_max_y) < 1e-12) {
        if (blocked({c.x + sx, c.y}) || blocked({c.x, c.y + sy})) return false;
        c.x += sx;
        c.y += sy;
        t_max_x += t_dx;
        t_max_y += t_dy;
      } else if (t_max_x < t_max_y) {
        c.x += sx;
        t_max_x += t_dx;
      } else {
        c.y += sy;
        t_max_y += t_dy;
      }
      if (blocked(c)) return false;
    }
    return true;
  }

 private:
  Vec2 origin_;
  double cell_size_{0.1};
  int width_{0};
  int height_{0};
  std::vector<std::uint8_t> blocked_;
  double inflation_{0.0};
};

/// Grid path with its move counts; cost = straight + sqrt(2) * diagonal.
struct GridPath {
  std::vector<Cell> cells;
  int straight{0};
  int diagonal{0};

  double cost() const { return straight + std::numbers::sqrt2 * diagonal; }
};

namespace detail {

inline double octile(Cell a, Cell b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return (dx + dy) + (std::numbers::sqrt2 - 2.0) * std::min(dx, dy);
}

inline constexpr std::array<std::pair<int, int>, 8> kMoves{
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

}  // namespace detail

/// A* over 8-connected free cells. Diagonal moves require both adjacent
/// cardinal cells to be free. Returns nullopt when the goal is unreachable.
inline std::optional<GridPath> astar(const NavGrid& grid, Cell start, Cell goal) {
  if (grid.blocked(start) || grid.blocked(goal)) return std::nullopt;
  const std::size_t n = static_cast<std::size_t>(grid.width()) * static_cast<std::size_t>(grid.height());
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  struct Open {
    double f;
    double h;
    std::size_t idx;
    bool operator>(const Open& o) const {
      if (f != o.f) return f > o.f;
      if (h != o.h) return h > o.h;
      return idx > o.idx;
    }
  };
  std::priority_queue<Open, std::vector<Open>, std::greater<>> open;
  const std::size_t s = grid.index(start);
  g[s] = 0.0;
  open.push({detail::octile(start, goal), detail::octile(start, goal), s});
  const auto w = static_cast<std::size_t>(grid.width());
  while (!open.empty()) {
    const Open cur = open.top();
    open.pop();
    if (closed[cur.idx]) continue;
    closed[cur.idx] = 1;
    const Cell c{static_cast<int>(cur.idx % w), static_cast<int>(cur.idx / w)};
    if (c == goal) break;
    for (auto [mx, my] : detail::kMoves) {
      const Cell nb{c.x + mx, c.y + my};
      if (grid.blocked(nb)) continue;
      const bool diag = mx != 0 && my != 0;
      if (diag && (grid.blocked({c.x + mx, c.y}) || grid.blocked({c.x, c.y + my}))) continue;
      const std::size_t ni = grid.index(nb);
      if (closed[ni]) continue;
      const double ng = g[cur.idx] + (diag ? std::numbers::sqrt2 : 1.0);
      if (ng < g[ni]) {
        g[ni] = ng;
        parent[ni] = static_cast<std::int64_t>(cur.idx);
        const double h = detail::octile(nb, goal);
        open.push({ng + h, h, ni});
      }
    }
  }
  const std::size_t gi = grid.index(goal);
  if (!closed[gi]) return std::nullopt;
  GridPath path;
  for (std::int64_t i = static_cast<std::int64_t>(gi); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    const auto u = static_cast<std::size_t>(i);
    path.cells.push_back({static_cast<int>(u % w), static_cast<int>(u / w)});
  }
  std::reverse(path.cells.begin(), path.cells.end());
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const bool diag = path.cells[i].x != path.cells[i - 1].x && path.cells[i].y != path.cells[i - 1].y;
    (diag ? path.diagonal : path.straight) += 1;
  }
  return path;
}

class PlanError : public NavError {
 public:
  enum class Code { StartBlocked, GoalBlocked, NoPath };
  PlanError(Code code, const std::string& what) : NavError(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Drops every waypoint whose neighbours see each other in the grid.
inline std::vector<Vec2> string_pull(const NavGrid& grid, const std::vector<Vec2>& pts) {
  if (pts.size() <= 2) return pts;
  std::vector<Vec2> out{pts.front()};
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = pts.size() - 1; j > i + 1; --j) {
      if (grid.segment_free(pts[i], pts[j])) {
        next = j;
        break;
      }
    }
    out.push_back(pts[next]);
    i = next;
  }
  return out;
}

/// Waypoints from start to goal avoiding the inflated obstacles: A* over
/// cells, endpoints replaced by the exact start and goal, then string-pulled.
inline std::vector<Vec2> plan_global(const NavGrid& grid, Vec2 start, Vec2 goal) {
  const Cell sc = grid.cell_of(start);
  const Cell gc = grid.cell_of(goal);
  if (grid.blocked(sc)) throw PlanError(PlanError::Code::StartBlocked, "start position is blocked");
  if (grid.blocked(gc)) throw PlanError(PlanError::Code::GoalBlocked, "goal position is blocked");
  const auto path = astar(grid, sc, gc);
  if (!path) throw PlanError(PlanError::Code::NoPath, "no path between start and goal");
  std::vector<Vec2> pts;
  pts.reserve(path->cells.size() + 1);
  pts.push_back(start);
  for (std::size_t i = 1; i + 1 < path->cells.size(); ++i) pts.push_back(grid.center(path->cells[i]));
  pts.push_back(goal);
  return string_pull(grid, pts);
}

}  // namespace fva::nav
