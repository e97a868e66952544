#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "alslq/errors.hpp"

namespace alslq {

/// Strictly increasing sequence of time stamps spanning [t0, tf].
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> nodes);

  /// Uniform grid with `num_nodes` nodes (>= 2) on [t0, tf].
  static TimeGrid uniform(double t0, double tf, std::size_t num_nodes);
  /// Uniform grid on [t0, t0 + duration] whose spacing is at most `max_step`.
  static TimeGrid with_step(double t0, double duration, double max_step);

  double t0() const { return nodes_.front(); }
  double tf() const { return nodes_.back(); }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Index i of the interval [nodes[i], nodes[i+1]] containing t (clamped).
  std::size_t interval(double t) const;

  /// Grid translated by dt.
  TimeGrid shifted(double dt) const;

  bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

 private:
  std::vector<double> nodes_;
};

/// Values sampled on a TimeGrid; linear interpolation in between, clamped
/// outside. `Value` is an Eigen vector or matrix type.
template <typename Value>
class TimeSeries {
 public:
  TimeSeries() = default;
  TimeSeries(TimeGrid grid, std::vector<Value> values) : grid_(std::move(grid)), values_(std::move(values)) {
    validate();
  }

  /// Every node holds `value`.
  static TimeSeries constant(const TimeGrid& grid, const Value& value) {
    return TimeSeries(grid, std::vector<Value>(grid.size(), value));
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Value>& values() const { return values_; }
  std::vector<Value>& mutable_values() { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const Value& operator[](std::size_t i) const { return values_[i]; }
  Value& operator[](std::size_t i) { return values_[i]; }
  double time(std::size_t i) const { return grid_[i]; }
  const Value& front() const { return values_.front(); }
  const Value& back() const { return values_.back(); }

  Eigen::Index rows() const { return values_.empty() ? 0 : values_.front().rows(); }
  Eigen::Index cols() const { return values_.empty() ? 0 : values_.front().cols(); }

  /// Piecewise-linear value at t; t outside [t0, tf] is clamped to the nearest endpoint.
  Value at(double t) const {
    if (values_.empty()) {
      throw DimensionError("interpolate: trajectory has no samples");
    }
    if (t <= grid_.t0()) return values_.front();
    if (t >= grid_.tf()) return values_.back();
    const std::size_t i = grid_.interval(t);
    const double t_lo = grid_[i];
    const double t_hi = grid_[i + 1];
    const double w = (t - t_lo) / (t_hi - t_lo);
    if (w == 0.0) return values_[i];
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

 private:
  void validate() const {
    if (values_.size() != grid_.size()) {
      throw DimensionError("trajectory: " + std::to_string(values_.size()) + " values for " +
                           std::to_string(grid_.size()) + " grid nodes");
    }
    for (const auto& v : values_) {
      if (v.rows() != values_.front().rows() || v.cols() != values_.front().cols()) {
        throw DimensionError("trajectory: inconsistent value dimensions");
      }
      if (!v.allFinite()) {
        throw NumericalError("trajectory: non-finite entry");
      }
    }
  }

  TimeGrid grid_;
  std::vector<Value> values_;
};

using Trajectory = TimeSeries<Eigen::VectorXd>;
using MatrixTrajectory = TimeSeries<Eigen::MatrixXd>;

/// Piecewise-linear interpolation of `traj` at t (clamped at the ends).
Eigen::VectorXd interpolate(const Trajectory& traj, double t);

/// Re-sample `series` on [t0 + dt, tf + dt] with the same node spacing. The
/// overlap is interpolated; the tail beyond tf holds the final value.
template <typename Value>
TimeSeries<Value> shift_and_extrapolate(const TimeSeries<Value>& series, double dt) {
  if (dt < 0.0) {
    throw std::invalid_argument("shift_and_extrapolate: negative shift " + std::to_string(dt));
  }
  TimeGrid grid = series.grid().shifted(dt);
  std::vector<Value> values;
  values.reserve(grid.size());
  for (double t : grid.nodes()) values.push_back(series.at(t));
  return TimeSeries<Value>(std::move(grid), std::move(values));
}

/// Re-sample `series` onto the nodes of `grid`.
template <typename Value>
TimeSeries<Value> resample(const TimeSeries<Value>& series, const TimeGrid& grid) {
  std::vector<Value> values;
  values.reserve(grid.size());
  for (double t : grid.nodes()) values.push_back(series.at(t));
  return TimeSeries<Value>(grid, std::move(values));
}

// CSV: header row "time,<names...>", then one row per node.
void write_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& column_names);
Trajectory read_csv(std::istream& is, std::vector<std::string>* column_names = nullptr);

}  // namespace alslq
