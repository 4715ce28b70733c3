#pragma once

#include <string>
#include <vector>

#include "iofts/lmi.hpp"
#include "iofts/time_grid.hpp"

namespace iofts {

/// A matrix-valued decision unknown, piecewise linear on a grid: one matrix
/// of decision scalars per node, derivative constant on each subinterval
/// ((next - current) / step). Continuity is structural (shared node
/// values); symmetry, when set, is structural too.
struct PwlUnknown {
  TimeGrid grid{0.0, 1.0, 1.0};
  int rows = 0;
  int cols = 0;
  bool symmetric = false;
  std::vector<UnknownRef> nodes;

  static PwlUnknown symmetricOnGrid(VarLayout& layout, const TimeGrid& grid, int n,
                                    const std::string& name);
  static PwlUnknown fullOnGrid(VarLayout& layout, const TimeGrid& grid, int rows, int cols,
                               const std::string& name);

  const UnknownRef& at(int node) const { return nodes[static_cast<size_t>(node)]; }

  Eigen::MatrixXd value(const Eigen::VectorXd& x, int node) const;
  /// PWL interpolation between nodes (clamped to the grid range).
  Eigen::MatrixXd interpolate(const Eigen::VectorXd& x, double t) const;
  /// Constant derivative on subinterval k.
  Eigen::MatrixXd derivative(const Eigen::VectorXd& x, int subinterval) const;

  std::vector<Eigen::MatrixXd> allValues(const Eigen::VectorXd& x) const;
};

}  // namespace iofts
