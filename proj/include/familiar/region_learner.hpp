#pragma once

#include <optional>
#include <string>
#include <vector>

#include "familiar/geometry.hpp"

namespace familiar {

struct RegionSample {
  double x = 0.0;
  double y = 0.0;
  std::string label;
  bool operator==(const RegionSample&) const = default;
};

/// 1-nearest-neighbour region classifier with a rejection radius: points
/// farther than `tau` from every sample stay unclassified.
class RegionLearner {
 public:
  static constexpr int k = 1;

  explicit RegionLearner(double tau = 3.0);

  double tau() const { return tau_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  RegionSample sample(std::size_t i) const { return {xs_[i], ys_[i], labels_[i]}; }
  std::vector<RegionSample> samples() const;
  bool has_label(const std::string& label) const;

  /// Appends a sample; duplicates are kept. Throws std::invalid_argument on an empty label.
  RegionSample add(double x, double y, std::string label);

  /// Label of the nearest sample (lowest index on ties), or none when there
  /// are no samples or the nearest one is farther than tau.
  std::optional<std::string> classify(Point p) const;

  bool operator==(const RegionLearner&) const = default;

 private:
  double tau_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<std::string> labels_;
};

/// Per-cell classification of a bounds-aligned grid, row-major from the
/// lower-left cell. `cells[i]` indexes `labels`, -1 for unclassified.
struct FloorGrid {
  double resolution = 0.25;
  int cols = 0;
  int rows = 0;
  std::vector<std::string> labels;
  std::vector<int> cells;

  Point cell_center(int col, int row) const {
    return {(col + 0.5) * resolution, (row + 0.5) * resolution};
  }
  std::optional<std::string> at(int col, int row) const {
    const int v = cells[static_cast<std::size_t>(row) * cols + col];
    if (v < 0) return std::nullopt;
    return labels[static_cast<std::size_t>(v)];
  }
  bool operator==(const FloorGrid&) const = default;
};

/// Throws std::invalid_argument when resolution <= 0.
FloorGrid floor_grid(const RegionLearner& learner, double width, double height, double resolution);

}  // namespace familiar
