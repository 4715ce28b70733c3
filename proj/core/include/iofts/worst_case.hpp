#pragma once

#include "iofts/simulate.hpp"
#include "iofts/systems.hpp"

namespace iofts {

/// Outcome of a budgeted adversarial search. The peak is a lower bound on
/// the true worst case: the search is a falsifier, not an exact optimizer.
struct WorstCaseResult {
  double peak = 0.0;
  double peakTime = 0.0;
  Trajectory trajectory;
  InputSignal input;
  std::vector<double> resetRealization;  // empty for plain LTV systems
  int evaluations = 0;
};

/// Adversarial disturbance search over `budget` candidate simulations.
/// Energy-bounded class: reachability-Gramian worst inputs per candidate
/// peak time plus random unit-energy draws. Amplitude-bounded class:
/// column/sign bang-bang inputs with random switch instants, refined by
/// coordinate descent on the best candidate. Every candidate satisfies its
/// admissibility bound up to 1e-9.
WorstCaseResult searchWorstCase(const LtvSystem& sys, const IOFTSSpec& spec, int budget,
                                unsigned seed);

/// Switched variant: candidates pair a reset realization (grid + random +
/// local search inside the windows) with a disturbance candidate.
WorstCaseResult searchWorstCase(const SwitchedSystem& ssys, const IOFTSSpec& spec, int budget,
                                unsigned seed);

}  // namespace iofts
