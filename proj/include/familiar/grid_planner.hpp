#pragma once

#include <optional>
#include <span>
#include <vector>

#include "familiar/geometry.hpp"

namespace familiar {

/// Occupancy grid over [0,width]x[0,height] with obstacles inflated by the
/// robot radius, plus an 8-connected A* planner on it.
class GridPlanner {
 public:
  GridPlanner() = default;
  GridPlanner(double width, double height, std::span<const Rect> walls, double resolution = 0.1,
              double clearance = 0.2);

  double resolution() const { return resolution_; }
  int cols() const { return cols_; }
  int rows() const { return rows_; }
  bool blocked(int col, int row) const;

  /// True when the straight segment stays clear of every inflated wall.
  bool line_free(Point a, Point b) const;

  /// Waypoints from `start` to `goal` (both included when reachable), with
  /// redundant grid corners removed by line-of-sight shortcutting. Empty when
  /// no path exists.
  std::vector<Point> plan(Point start, Point goal) const;

 private:
  struct Cell {
    int col;
    int row;
  };
  Cell cell_of(Point p) const;
  Point center_of(int col, int row) const;
  std::optional<Cell> nearest_free(Cell c) const;
  int index(int col, int row) const { return row * cols_ + col; }

  double width_ = 0.0;
  double height_ = 0.0;
  double resolution_ = 0.1;
  int cols_ = 0;
  int rows_ = 0;
  std::vector<Rect> inflated_;
  std::vector<unsigned char> occupied_;
};

double path_length(std::span<const Point> path);

}  // namespace familiar
