#pragma once

#include <vector>

namespace iofts {

/// Uniform grid on the interval [t0, t0 + T] with node spacing `step`.
///
/// The node count n satisfies t0 + (n-1)*step == t0 + T up to a relative
/// tolerance of 1e-9*T, so the last node always lands on the interval end.
class TimeGrid {
 public:
  TimeGrid(double t0, double horizon, double step);

  /// Grid with `subintervals` equal pieces.
  static TimeGrid fromSubintervals(double t0, double horizon, int subintervals);

  /// Grid whose step is the nearest exact divisor of the horizon to
  /// `nominal_step`. CLI entry points go through here so that a requested
  /// sample time like 0.003 on a 0.5 s window snaps to 0.5/167.
  static TimeGrid fromNominalStep(double t0, double horizon, double nominal_step);

  double t0() const { return t0_; }
  double horizon() const { return horizon_; }
  double end() const { return t0_ + horizon_; }
  double step() const { return step_; }
  int subintervals() const { return subintervals_; }
  int nodeCount() const { return subintervals_ + 1; }

  double node(int k) const;
  std::vector<double> nodes() const;

  /// Index of the node nearest to t, or -1 if t is farther than `tol`
  /// from every node.
  int indexOf(double t, double tol) const;

  /// True if t lies in [t0, end] up to the clamping tolerance 1e-9*T.
  bool contains(double t) const;

  /// Grid with the step divided by an integer factor; its node set contains
  /// this grid's nodes.
  TimeGrid refined(int factor) const;

  double clampTolerance() const { return 1e-9 * horizon_; }

  bool operator==(const TimeGrid& other) const = default;

 private:
  double t0_;
  double horizon_;
  double step_;
  int subintervals_;
};

}  // namespace iofts
