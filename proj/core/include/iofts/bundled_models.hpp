#pragma once

#include <vector>

#include "iofts/model_io.hpp"

namespace iofts {

/// 2-state LTV plant with affine-in-t diagonal growth; R = 1 on [0, 0.5].
/// Q is left at the conventional 0.3 scale; q sweeps override it.
Model makeExample1Model();

/// Two-mode switched system with resets at {0.2, 0.5, 0.75} on [0, 1],
/// jump map diag(-1.1, 0.1), amplitude-bounded disturbances, Q = 0.14.
/// `deltaT` is the common reset-window half-width (0 = known times).
Model makeExample2Model(double deltaT = 0.03);

struct BuildingParams {
  std::vector<double> masses;    // per floor, base first
  std::vector<double> springs;   // k0 (isolator) then k1..k_{N-1}
  std::vector<double> dampers;   // c0 (isolator) then c1..c_{N-1}
};

/// Parameters of the six-story base-isolated building.
BuildingParams sixStoryBuildingParams();

/// Assemble the lumped-mass building plant in absolute coordinates:
/// state [velocities; displacements], control force on the base floor,
/// disturbance w = [ground displacement, ground velocity], output = the
/// spring/damper force balance at the base floor. R = I, Q = 0.1 on [0, 35].
Model makeBuildingModel(const BuildingParams& params);

}  // namespace iofts
