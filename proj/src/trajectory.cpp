#include "alslq/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace alslq {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) {
    throw std::invalid_argument("TimeGrid: at least 2 nodes required");
  }
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i + 1] > nodes_[i])) {
      throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
    }
  }
  if (!std::isfinite(nodes_.front()) || !std::isfinite(nodes_.back())) {
    throw std::invalid_argument("TimeGrid: non-finite node");
  }
}

TimeGrid TimeGrid::uniform(double t0, double tf, std::size_t num_nodes) {
  if (num_nodes < 2 || !(tf > t0)) {
    throw std::invalid_argument("TimeGrid::uniform: need tf > t0 and num_nodes >= 2");
  }
  std::vector<double> nodes(num_nodes);
  const double h = (tf - t0) / static_cast<double>(num_nodes - 1);
  for (std::size_t i = 0; i < num_nodes; ++i) nodes[i] = t0 + h * static_cast<double>(i);
  nodes.back() = tf;
  return TimeGrid(std::move(nodes));
}

TimeGrid TimeGrid::with_step(double t0, double duration, double max_step) {
  if (!(max_step > 0.0) || !(duration > 0.0)) {
    throw std::invalid_argument("TimeGrid::with_step: duration and step must be positive");
  }
  // Round so that a duration which is an integer multiple of the step keeps that spacing.
  const auto intervals = static_cast<std::size_t>(std::ceil(duration / max_step - 1e-9));
  return uniform(t0, t0 + duration, std::max<std::size_t>(intervals, 1) + 1);
}

std::size_t TimeGrid::interval(double t) const {
  if (t <= nodes_.front()) return 0;
  if (t >= nodes_.back()) return nodes_.size() - 2;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

TimeGrid TimeGrid::shifted(double dt) const {
  std::vector<double> nodes = nodes_;
  for (double& t : nodes) t += dt;
  return TimeGrid(std::move(nodes));
}

Eigen::VectorXd interpolate(const Trajectory& traj, double t) { return traj.at(t); }

void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& column_names) {
  const auto dim = static_cast<std::size_t>(traj.rows());
  if (!column_names.empty() && column_names.size() != dim) {
    throw DimensionError("write_csv: " + std::to_string(column_names.size()) + " names for dimension " +
                         std::to_string(dim));
  }
  os << "time";
  for (std::size_t j = 0; j < dim; ++j) {
    os << ',' << (column_names.empty() ? "x" + std::to_string(j) : column_names[j]);
  }
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.time(i);
    for (Eigen::Index j = 0; j < traj[i].size(); ++j) os << ',' << traj[i](j);
    os << '\n';
  }
}

Trajectory read_csv(std::istream& is, std::vector<std::string>* column_names) {
  std::string line;
  // Skip leading comment lines (provenance headers).
  do {
    if (!std::getline(is, line)) throw std::invalid_argument("read_csv: missing header");
  } while (!line.empty() && line.front() == '#');

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    times.push_back(std::stod(cell));
    Eigen::VectorXd v(static_cast<Eigen::Index>(names.size()));
    Eigen::Index j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= v.size()) throw DimensionError("read_csv: too many columns");
      v(j++) = std::stod(cell);
    }
    if (j != v.size()) throw DimensionError("read_csv: too few columns");
    values.push_back(std::move(v));
  }
  if (column_names != nullptr) *column_names = names;
  return Trajectory(TimeGrid(std::move(times)), std::move(values));
}

}  // namespace alslq
