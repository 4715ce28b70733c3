#pragma once

#include <Eigen/Core>
#include <vector>

#include "iofts/integration_method.hpp"
#include "iofts/simulate.hpp"
#include "iofts/systems.hpp"

namespace iofts {

/// Reachability Gramian samples W(t_k, t0) along a grid, W[0] = 0.
struct GramianTrajectory {
  TimeGrid grid;
  std::vector<Eigen::MatrixXd> W;
};

struct GramianVerdict {
  bool isIOFTS = false;
  double margin = 0.0;   // min over nodes of 1 - lambda_max(Q^1/2 C W C' Q^1/2)
  double worstTime = 0.0;
};

/// Integrate Wdot = A W + W A' + G R^-1 G', W(t0) = 0, on the grid.
/// The iterate is symmetrized after every step.
GramianTrajectory solveDLE(const LtvSystem& sys, const IOFTSSpec& spec, const TimeGrid& grid,
                           IntegrationMethod method = IntegrationMethod::Rk4);

/// Evaluate the energy-bounded-disturbance output condition along the
/// trajectory: certified iff lambda_max(Q^1/2 C W C' Q^1/2) < 1 at every
/// node (strict; a zero margin is a failure).
GramianVerdict checkCondition(const GramianTrajectory& traj, const MatrixFunction& C,
                              const MatrixFunction& Q);

/// Largest q such that Q = q * Qshape is certified. Computed directly from
/// the peak eigenvalue (the condition scales linearly in q) and confirmed by
/// bisection to `relTol`. Returns +inf for an unreachable output (W = 0).
double findQmax(const LtvSystem& sys, const TimeGrid& omega, const MatrixFunction& R,
                const MatrixFunction& Qshape, IntegrationMethod method = IntegrationMethod::Rk4,
                double relTol = 1e-3);

/// Unit-energy disturbance that realizes the peak weighted output at the
/// grid node tStar: w(tau) = R^-1 G' Phi'(tStar, tau) C' Q^1/2 v scaled to
/// unit energy, with v the top eigenvector and Phi obtained by backward
/// co-integration of the adjoint. Zero after tStar.
InputSignal worstCaseInput(const GramianTrajectory& traj, const LtvSystem& sys,
                           const IOFTSSpec& spec, double tStar);

}  // namespace iofts
