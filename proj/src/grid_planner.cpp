#include "familiar/grid_planner.hpp"

#include <cmath>
#include <limits>
#include <queue>

namespace familiar {

GridPlanner::GridPlanner(double width, double height, std::span<const Rect> walls,
                         double resolution, double clearance)
    : width_(width), height_(height), resolution_(resolution) {
  cols_ = std::max(1, static_cast<int>(std::ceil(width / resolution - 1e-9)));
  rows_ = std::max(1, static_cast<int>(std::ceil(height / resolution - 1e-9)));
  for (const auto& w : walls) inflated_.push_back(w.inflated(clearance));
  occupied_.assign(static_cast<std::size_t>(cols_) * rows_, 0);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const Point p = center_of(c, r);
      for (const auto& w : inflated_) {
        if (w.contains(p)) {
          occupied_[index(c, r)] = 1;
          break;
        }
      }
    }
  }
}

bool GridPlanner::blocked(int col, int row) const {
  if (col < 0 || row < 0 || col >= cols_ || row >= rows_) return true;
  return occupied_[index(col, row)] != 0;
}

bool GridPlanner::line_free(Point a, Point b) const {
  for (const auto& w : inflated_)
    if (segment_intersects(a, b, w)) return false;
  return true;
}

GridPlanner::Cell GridPlanner::cell_of(Point p) const {
  const int c = std::clamp(static_cast<int>(std::floor(p.x / resolution_)), 0, cols_ - 1);
  const int r = std::clamp(static_cast<int>(std::floor(p.y / resolution_)), 0, rows_ - 1);
  return {c, r};
}

Point GridPlanner::center_of(int col, int row) const {
  return {(col + 0.5) * resolution_, (row + 0.5) * resolution_};
}

std::optional<GridPlanner::Cell> GridPlanner::nearest_free(Cell c) const {
  if (!blocked(c.col, c.row)) return c;
  // Ring search; deterministic scan order.
  const int max_ring = std::max(cols_, rows_);
  for (int ring = 1; ring <= max_ring; ++ring) {
    std::optional<Cell> best;
    int best_d2 = std::numeric_limits<int>::max();
    for (int dr = -ring; dr <= ring; ++dr) {
      for (int dc = -ring; dc <= ring; ++dc) {
        if (std::max(std::abs(dr), std::abs(dc)) != ring) continue;
        if (blocked(c.col + dc, c.row + dr)) continue;
        const int d2 = dr * dr + dc * dc;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = Cell{c.col + dc, c.row + dr};
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

std::vector<Point> GridPlanner::plan(Point start, Point goal) const {
  if (line_free(start, goal)) return {start, goal};

  const auto s = nearest_free(cell_of(start));
  const auto g = nearest_free(cell_of(goal));
  if (!s || !g) return {};

  const int n = cols_ * rows_;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<unsigned char> closed(n, 0);

  const int start_i = index(s->col, s->row);
  const int goal_i = index(g->col, g->row);
  auto heuristic = [&](int i) {
    const int dc = std::abs(i % cols_ - g->col);
    const int dr = std::abs(i / cols_ - g->row);
    return (std::max(dc, dr) + (std::sqrt(2.0) - 1.0) * std::min(dc, dr)) * resolution_;
  };

  using Entry = std::pair<double, int>;  // (f, cell); ties resolve on cell index
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[start_i] = 0.0;
  open.push({heuristic(start_i), start_i});

  static constexpr int kDc[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDr[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == goal_i) break;
    const int cc = cur % cols_;
    const int cr = cur / cols_;
    for (int k = 0; k < 8; ++k) {
      const int nc = cc + kDc[k];
      const int nr = cr + kDr[k];
      if (blocked(nc, nr)) continue;
      // No diagonal corner cutting.
      if (kDc[k] != 0 && kDr[k] != 0 && (blocked(cc + kDc[k], cr) || blocked(cc, cr + kDr[k])))
        continue;
      const int ni = index(nc, nr);
      const double step = (kDc[k] != 0 && kDr[k] != 0 ? std::sqrt(2.0) : 1.0) * resolution_;
      if (cost[cur] + step < cost[ni]) {
        cost[ni] = cost[cur] + step;
        parent[ni] = cur;
        open.push({cost[ni] + heuristic(ni), ni});
      }
    }
  }
  if (!closed[goal_i]) return {};

  std::vector<Point> raw;
  for (int i = goal_i; i != -1; i = parent[i]) raw.push_back(center_of(i % cols_, i / cols_));
  std::reverse(raw.begin(), raw.end());
  raw.insert(raw.begin(), start);
  if (line_free(raw.back(), goal)) raw.push_back(goal);

  // Greedy shortcutting: from each anchor jump to the farthest visible waypoint.
  std::vector<Point> path{raw.front()};
  std::size_t anchor = 0;
  while (anchor + 1 < raw.size()) {
    std::size_t next = anchor + 1;
    for (std::size_t j = raw.size() - 1; j > anchor + 1; --j) {
      if (line_free(raw[anchor], raw[j])) {
        next = j;
        break;
      }
    }
    path.push_back(raw[next]);
    anchor = next;
  }
  return path;
}

double path_length(std::span<const Point> path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  return len;
}

}  // namespace familiar
