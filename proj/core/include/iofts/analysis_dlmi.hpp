#pragma once

#include <functional>
#include <optional>
#include <string>

#include "iofts/lmi.hpp"
#include "iofts/pwl_unknown.hpp"
#include "iofts/systems.hpp"

namespace iofts {

struct AnalysisOptions {
  /// Output-bound strengthening factor; 0 = auto (1.01 when any data has
  /// breakpoints, 1 otherwise).
  double xi = 0.0;
  /// Constraint checkpoints per subinterval; 0 = auto (the two endpoints
  /// when all data is affine in t, four checkpoints otherwise).
  int checkpoints = 0;
  /// Amplitude-bounded class: weight the output bound by t instead of
  /// (t - t0). The two coincide when t0 = 0.
  bool literalTimeWeight = false;
};

/// A discretized differential LMI feasibility problem over a piecewise
/// linear P(.) plus node-wise output/positivity bounds.
struct AnalysisProblem {
  AffineLmiSystem lmis;
  PwlUnknown P;
  TimeGrid grid{0.0, 1.0, 1.0};
  /// Set when the data makes the problem infeasible regardless of P
  /// (e.g. ||H|| >= 1 in the uncertain blocks).
  std::optional<std::string> structuralInfeasibility;
};

/// Energy-bounded disturbances, strictly proper plant:
/// per subinterval checkpoint  [[Pdot + A'P + PA, PG], [G'P, -R]] < 0,
/// per node  P > xi C'QC  and  P > 0.
AnalysisProblem buildW2Analysis(const LtvSystem& sys, const IOFTSSpec& spec,
                                const TimeGrid& grid, const AnalysisOptions& opts = {});

/// Amplitude-bounded disturbances: same blocks with Q replaced by the
/// time-weighted Qtilde(t) = (t - t0) Q(t).
AnalysisProblem buildWinfAnalysis(const LtvSystem& sys, const IOFTSSpec& spec,
                                  const TimeGrid& grid, const AnalysisOptions& opts = {});

/// Non-strictly-proper plant (direct term D), energy-bounded disturbances,
/// for a fixed theta > 1:
///   DLMI as above;  (theta-1) R > 2 theta D'QD  and  P > 2 theta C'QC
/// per node. theta multiplies unknowns nonlinearly, so it stays a caller
/// parameter (see thetaGrid()).
AnalysisProblem buildNonProperW2(const LtvSystem& sys, const IOFTSSpec& spec,
                                 const TimeGrid& grid, double theta,
                                 const AnalysisOptions& opts = {});

struct RobustConstants {
  double c1 = 1.0, c2 = 1.0, c3 = 1.0, c4 = 1.0;
  double theta = 2.0;
};

/// Norm-bounded uncertainty feedback for fixed multipliers. The disturbance
/// channel is base.B when present, else base.G.
AnalysisProblem buildRobustW2(const UncertainLtvSystem& usys, const IOFTSSpec& spec,
                              const TimeGrid& grid, const RobustConstants& consts,
                              const AnalysisOptions& opts = {});

/// Conventional multiplier sweep for the fixed-theta conditions.
const std::vector<double>& thetaGrid();

/// Feasibility with the certificate audited through verifyCertificate; a
/// structurally infeasible problem short-circuits.
FeasibilityResult solveAnalysis(const AnalysisProblem& problem, const SolveOptions& opts = {});

struct QmaxSearch {
  double qmax = 0.0;                   // largest certified q (0 = none found)
  Eigen::VectorXd certificate;         // decision vector at qmax
  int solves = 0;
};

struct QmaxSearchOptions {
  double qLo = 0.0;                 // known-feasible lower end (verified first)
  Eigen::VectorXd warmCertificate;  // e.g. a coarse certificate lifted to this grid
};

/// Bisection (absolute tolerance) for the largest q with builder(q)
/// feasible. Certificates from feasible probes are re-verified on new
/// probes first and warm-start the solver otherwise; a lifted coarse
/// certificate makes refinement searches start from the coarse level.
QmaxSearch findQmaxDlmi(const std::function<AnalysisProblem(double)>& builder, double qHi,
                        double absTol = 1e-2, const SolveOptions& solveOpts = {},
                        const QmaxSearchOptions& searchOpts = {});

/// Re-sample a piecewise-linear certificate onto a finer grid (the coarse
/// node set must be contained in the fine one for exact transfer).
Eigen::VectorXd liftPwlCertificate(const PwlUnknown& coarseP, const Eigen::VectorXd& x,
                                   const TimeGrid& fineGrid);

/// Max of x'P(t)x over simulated trajectories under random unit-energy
/// disturbances; a valid certificate keeps this below 1.
double auditCertificateByTrajectories(const LtvSystem& sys, const IOFTSSpec& spec,
                                      const PwlUnknown& P, const Eigen::VectorXd& x,
                                      int inputCount, unsigned seed);

}  // namespace iofts
