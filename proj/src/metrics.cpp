#include "alslq/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace alslq {

double trapezoid(const TimeGrid& grid, const std::vector<double>& samples) {
  if (samples.size() != grid.size()) throw DimensionError("trapezoid: sample count does not match the grid");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    sum += 0.5 * (samples[i] + samples[i + 1]) * (grid[i + 1] - grid[i]);
  }
  return sum;
}

double violation_l2(const Trajectory& h) {
  if (h.empty()) return 0.0;
  std::vector<double> squared(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) squared[i] = h[i].cwiseMin(0.0).squaredNorm();
  return std::sqrt(trapezoid(h.grid(), squared));
}

double max_violation(const Trajectory& h) {
  double worst = 0.0;
  for (const auto& v : h.values()) {
    if (v.size() > 0) worst = std::max(worst, -v.minCoeff());
  }
  return worst;
}

}  // namespace alslq
