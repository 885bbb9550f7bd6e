#include "familiar/region_learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "familiar/kernels/nearest.hpp"

namespace familiar {

RegionLearner::RegionLearner(double tau) : tau_(tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
}

std::vector<RegionSample> RegionLearner::samples() const {
  std::vector<RegionSample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(sample(i));
  return out;
}

bool RegionLearner::has_label(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

RegionSample RegionLearner::add(double x, double y, std::string label) {
  if (label.empty()) throw std::invalid_argument("empty region label");
  xs_.push_back(x);
  ys_.push_back(y);
  labels_.push_back(std::move(label));
  return sample(size() - 1);
}

std::optional<std::string> RegionLearner::classify(Point p) const {
  const auto hit = kernels::nearest(xs_, ys_, p.x, p.y);
  if (!hit.found() || std::sqrt(hit.dist2) > tau_) return std::nullopt;
  return labels_[hit.index];
}

FloorGrid floor_grid(const RegionLearner& learner, double width, double height, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  FloorGrid grid;
  grid.resolution = resolution;
  grid.cols = static_cast<int>(std::ceil(width / resolution - 1e-9));
  grid.rows = static_cast<int>(std::ceil(height / resolution - 1e-9));
  grid.cells.assign(static_cast<std::size_t>(grid.cols) * grid.rows, -1);

  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const auto label = learner.classify(grid.cell_center(c, r));
      if (!label) continue;
      auto it = std::find(grid.labels.begin(), grid.labels.end(), *label);
      if (it == grid.labels.end()) it = grid.labels.insert(grid.labels.end(), *label);
      grid.cells[static_cast<std::size_t>(r) * grid.cols + c] =
          static_cast<int>(it - grid.labels.begin());
    }
  }
  return grid;
}

}  // namespace familiar
