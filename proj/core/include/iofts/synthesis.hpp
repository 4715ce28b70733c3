#pragma once

#include <string>
#include <vector>

#include "iofts/analysis_dlmi.hpp"
#include "iofts/lmi.hpp"
#include "iofts/pwl_unknown.hpp"
#include "iofts/systems.hpp"

namespace iofts {

/// Dynamic output-feedback controller, sampled on the synthesis grid.
struct Controller {
  MatrixFunction AK;  // n x n
  MatrixFunction BK;  // n x m
  MatrixFunction CK;  // m_u x n
  MatrixFunction DK;  // m_u x m

  int order() const { return AK.rows(); }
};

/// Coupled synthesis DLMIs in (S, T, AhatK, BhatK, ChatK, DK): the two
/// transformed closed-loop blocks plus the node-wise coupling block
/// [[S, I], [I, T]] > 0 that keeps reconstruction well posed.
struct SynthesisProblem {
  AffineLmiSystem lmis;
  PwlUnknown S, T;                       // symmetric n x n
  PwlUnknown AhatK, BhatK, ChatK, DK;    // full
  TimeGrid grid{0.0, 1.0, 1.0};
  std::vector<std::string> warnings;     // e.g. ill-conditioned weights
};

SynthesisProblem buildSynthesisDLMI(const LtvSystem& sys, const IOFTSSpec& spec,
                                    const TimeGrid& grid, const AnalysisOptions& opts = {});

/// Node values of every synthesis unknown extracted from a solution vector.
struct SynthesisSolution {
  TimeGrid grid{0.0, 1.0, 1.0};
  std::vector<Eigen::MatrixXd> S, T, Ahat, Bhat, Chat, DK;
};

SynthesisSolution extractSynthesis(const SynthesisProblem& problem, const Eigen::VectorXd& x);

/// Invert the change of variables at every node with M = (I - T S) N^-T:
///   BK = M^-1 (Bhat - T B DK)
///   CK = (Chat - DK C S) N^-T
///   AK = M^-1 (Ahat - Tdot S - Mdot N' - T B CK N' - M BK C S
///              - T (A + B DK C) S) N^-T
/// Tdot and Mdot use the forward-difference convention (backward at the
/// last node). Throws CouplingError/ReconstructionError on singular data.
Controller reconstructController(const SynthesisSolution& sol, const LtvSystem& sys,
                                 const MatrixFunction& Nchoice);
Controller reconstructController(const SynthesisSolution& sol, const LtvSystem& sys);

/// Forward recomputation of the hat variables from a reconstructed
/// controller; the round trip reproduces the solver's values.
struct HatRecomputation {
  std::vector<Eigen::MatrixXd> Ahat, Bhat, Chat;
};
HatRecomputation recomputeHats(const SynthesisSolution& sol, const Controller& ctrl,
                               const LtvSystem& sys, const MatrixFunction& Nchoice);

/// Plant-controller interconnection sampled on `nodes`:
///   A_cl = [[A + B DK C, B CK], [BK C, AK]], G_cl = [G; 0], C_cl = [C, 0].
LtvSystem closedLoop(const LtvSystem& sys, const Controller& ctrl,
                     const std::vector<double>& nodes);

}  // namespace iofts
