#include "iofts/pwl_unknown.hpp"

#include <algorithm>
#include <cmath>

namespace iofts {

PwlUnknown PwlUnknown::symmetricOnGrid(VarLayout& layout, const TimeGrid& grid, int n,
                                       const std::string& name) {
  PwlUnknown u;
  u.grid = grid;
  u.rows = u.cols = n;
  u.symmetric = true;
  u.nodes.reserve(static_cast<size_t>(grid.nodeCount()));
  for (int k = 0; k < grid.nodeCount(); ++k)
    u.nodes.push_back(layout.addSymmetric(name + "@" + std::to_string(k), n));
  return u;
}

PwlUnknown PwlUnknown::fullOnGrid(VarLayout& layout, const TimeGrid& grid, int rows, int cols,
                                  const std::string& name) {
  PwlUnknown u;
  u.grid = grid;
  u.rows = rows;
  u.cols = cols;
  u.symmetric = false;
  u.nodes.reserve(static_cast<size_t>(grid.nodeCount()));
  for (int k = 0; k < grid.nodeCount(); ++k)
    u.nodes.push_back(layout.addFull(name + "@" + std::to_string(k), rows, cols));
  return u;
}

Eigen::MatrixXd PwlUnknown::value(const Eigen::VectorXd& x, int node) const {
  return nodes[static_cast<size_t>(node)].unpack(x);
}

Eigen::MatrixXd PwlUnknown::interpolate(const Eigen::VectorXd& x, double t) const {
  const double pos = (t - grid.t0()) / grid.step();
  const int k = std::clamp(static_cast<int>(std::floor(pos)), 0, grid.subintervals() - 1);
  const double a = std::clamp(pos - k, 0.0, 1.0);
  return (1.0 - a) * value(x, k) + a * value(x, k + 1);
}

Eigen::MatrixXd PwlUnknown::derivative(const Eigen::VectorXd& x, int subinterval) const {
  const double h = grid.node(subinterval + 1) - grid.node(subinterval);
  return (value(x, subinterval + 1) - value(x, subinterval)) / h;
}

std::vector<Eigen::MatrixXd> PwlUnknown::allValues(const Eigen::VectorXd& x) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(nodes.size());
  for (size_t k = 0; k < nodes.size(); ++k) out.push_back(value(x, static_cast<int>(k)));
  return out;
}

}  // namespace iofts
