#pragma once

#include <Eigen/Core>
#include <vector>

#include "iofts/integration_method.hpp"
#include "iofts/systems.hpp"

namespace iofts {

/// Disturbance sampled on a node set, held constant between nodes
/// (zero-order hold).
struct InputSignal {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;

  static InputSignal zero(int dim, const std::vector<double>& nodes);
  static InputSignal constant(const Eigen::VectorXd& value, const std::vector<double>& nodes);

  Eigen::VectorXd at(double t) const;
  int dim() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }

  /// Trapezoid quadrature of w' R w over the node set.
  double energy(const MatrixFunction& R) const;
  /// Max over nodes of w' R w.
  double peakAmplitude(const MatrixFunction& R) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> y;
  std::vector<double> weighted;  // y' Q y per node
  double peakWeighted = 0.0;
  double peakTime = 0.0;
};

std::vector<double> gridNodes(const TimeGrid& grid);

/// Sorted union of `nodes` and `extra` (duplicates within tol merged).
std::vector<double> insertNodes(std::vector<double> nodes, const std::vector<double>& extra,
                                double tol = 1e-12);

Trajectory integrateLTV(const LtvSystem& sys, const IOFTSSpec& spec, const InputSignal& w,
                        const std::vector<double>& nodes,
                        IntegrationMethod method = IntegrationMethod::Rk4);

Trajectory integrateLTV(const LtvSystem& sys, const IOFTSSpec& spec, const InputSignal& w,
                        const TimeGrid& grid,
                        IntegrationMethod method = IntegrationMethod::Rk4);

/// Integrate the switched system; `resetRealization` lists the realized
/// reset instants (one per nominal reset, inside its window). Reset nodes
/// are inserted into the node set so jumps land exactly on nodes; at each
/// reset the trajectory records both the pre- and post-jump sample.
Trajectory integrateSwitched(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                             const std::vector<double>& resetRealization, const InputSignal& w,
                             const std::vector<double>& nodes,
                             IntegrationMethod method = IntegrationMethod::Rk4);

/// Mode active on each inter-reset segment (h resets -> h+1 entries).
std::vector<int> modeSequence(const SwitchedSystem& ssys, const TimeGrid& omega);

}  // namespace iofts
