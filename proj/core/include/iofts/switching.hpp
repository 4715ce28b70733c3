#pragma once

#include <string>
#include <utility>
#include <vector>

#include "iofts/analysis_dlmi.hpp"
#include "iofts/lmi.hpp"
#include "iofts/systems.hpp"

namespace iofts {

enum class SwitchRegime { Known, Arbitrary, Uncertain };

SwitchRegime switchRegimeFromString(const std::string& s);
std::string switchRegimeName(SwitchRegime r);

/// Reset-window partition: psi intervals carry the continuous dynamics
/// (closures overlap across a window), gamma windows carry the jump
/// constraints; the gammas must be pairwise disjoint.
struct IntervalPartition {
  std::vector<std::pair<double, double>> psi;    // h+1 intervals
  std::vector<std::pair<double, double>> gamma;  // h closed windows

  static IntervalPartition make(const SwitchedSystem& ssys, const TimeGrid& omega);
};

/// One piecewise-linear matrix unknown on a (possibly non-uniform) node
/// set; the certified function may jump between pieces.
struct SwitchedPiece {
  std::vector<double> nodes;
  std::vector<UnknownRef> P;
  int mode = 1;

  int indexOf(double t, double tol) const;
  Eigen::MatrixXd value(const Eigen::VectorXd& x, int node) const { return P[static_cast<size_t>(node)].unpack(x); }
};

struct SwitchedProblem {
  AffineLmiSystem lmis;
  std::vector<SwitchedPiece> pieces;
  IntervalPartition partition;
};

/// Exactly known resetting times: per-segment dynamics blocks against a
/// piecewise P with doubled nodes at the resets, jump blocks
/// J'P(t_k+)J - P(t_k) <= 0, and per-node output bounds.
SwitchedProblem buildKnownTimes(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                const TimeGrid& grid, const AnalysisOptions& opts = {});

/// No knowledge of the resetting times: one continuous P, dynamics and
/// output blocks for every family member at every node, jump blocks
/// J'PJ - P <= 0 everywhere.
SwitchedProblem buildArbitrarySwitching(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                        const TimeGrid& grid, const AnalysisOptions& opts = {});

/// Reset times known within +-deltaT windows: one P_j per psi interval with
/// the segment's mode, jump blocks linking consecutive pieces at every node
/// of each gamma window.
SwitchedProblem buildUncertainSwitching(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                        const TimeGrid& grid, const AnalysisOptions& opts = {});

struct SwitchedVerdict {
  bool certified = false;
  FeasibilityResult feasibility;
  double auditPeak = 0.0;                 // falsifier peak over the budget
  std::vector<double> auditRealization;   // realization attaining the peak
  bool soundnessViolated = false;         // feasible but falsified (never expected)
};

/// Build the regime's system, solve, audit the certificate, and falsify by
/// simulation over the given budget.
SwitchedVerdict certifySwitched(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                SwitchRegime regime, double ts,
                                const SolveOptions& solveOpts = {}, int auditBudget = 500,
                                unsigned seed = 1);

}  // namespace iofts
