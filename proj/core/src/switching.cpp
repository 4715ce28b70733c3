#include "iofts/switching.hpp"

#include <algorithm>
#include <cmath>

#include "iofts/errors.hpp"
#include "iofts/simulate.hpp"
#include "iofts/worst_case.hpp"
#include "dlmi_block_util.hpp"

namespace iofts {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<double> checkpointAlphas(const AnalysisOptions& opts,
                                     std::initializer_list<const MatrixFunction*> data) {
  int cps = opts.checkpoints;
  if (cps <= 0) {
    int degree = 0;
    for (const MatrixFunction* f : data)
      if (!f->empty()) degree = std::max(degree, f->degree());
    cps = degree <= 1 ? 2 : 4;
  }
  if (cps <= 2) return {0.0, 1.0};
  std::vector<double> alphas(static_cast<size_t>(cps));
  for (int i = 0; i < cps; ++i) alphas[static_cast<size_t>(i)] = double(i) / (cps - 1);
  return alphas;
}

std::vector<double> nodesBetween(const std::vector<double>& all, double lo, double hi,
                                 double tol) {
  std::vector<double> out;
  for (double t : all)
    if (t >= lo - tol && t <= hi + tol) out.push_back(t);
  return out;
}

void addPieceDynamics(AffineLmiSystem& sys, const SwitchedPiece& piece, const LtvSystem& mode,
                      const IOFTSSpec& spec, const std::vector<double>& alphas,
                      const std::string& tag) {
  for (size_t k = 0; k + 1 < piece.nodes.size(); ++k) {
    for (double a : alphas) {
      internal::addDlmiCheckpointBlock(
          sys, piece.P[k], piece.P[k + 1], piece.nodes[k], piece.nodes[k + 1], a, mode.A,
          mode.G, spec.R, tag + "-dlmi@" + std::to_string(k) + "+" + std::to_string(a));
    }
  }
}

void addPieceNodeBounds(AffineLmiSystem& sys, const SwitchedPiece& piece, const LtvSystem& mode,
                        const IOFTSSpec& spec, double xi, bool literalTimeWeight,
                        const std::string& tag) {
  const int n = mode.stateDim();
  for (size_t k = 0; k < piece.nodes.size(); ++k) {
    const double t = piece.nodes[k];
    const MatrixXd Ct = mode.C.eval(t);
    const MatrixXd bound =
        xi * Ct.transpose() * internal::effectiveOutputWeight(spec, t, literalTimeWeight) * Ct;
    internal::addNodeBoundBlock(sys, piece.P[k], 0.5 * (bound + bound.transpose()),
                                tag + "-output@" + std::to_string(k));
    internal::addNodeBoundBlock(sys, piece.P[k], MatrixXd::Zero(n, n),
                                tag + "-positivity@" + std::to_string(k));
  }
}

/// J' Pplus J - Pminus <= 0 evaluated at time t.
void addJumpBlock(AffineLmiSystem& sys, const UnknownRef& Pminus, const UnknownRef& Pplus,
                  const MatrixFunction& J, double t, const std::string& label) {
  const MatrixXd Jt = J.eval(t);
  const int nBefore = static_cast<int>(Jt.cols());
  if (Pminus.rows != nBefore || Pplus.rows != static_cast<int>(Jt.rows()))
    throw StructuralError("jump block: J dimensions do not match the adjacent pieces");
  LmiBlock block(nBefore, label);
  block.addTerm(0, 0, 0.5 * Jt.transpose(), Pplus, Jt);
  block.addTerm(0, 0, -0.5 * MatrixXd::Identity(nBefore, nBefore), Pminus,
                MatrixXd::Identity(nBefore, nBefore));
  sys.blocks.push_back(std::move(block));
}

double autoXiSwitch(const AnalysisOptions& opts) { return opts.xi > 0.0 ? opts.xi : 1.0; }

const LtvSystem& familyMode(const SwitchedSystem& ssys, int mode) {
  if (mode < 1 || mode > ssys.modeCount())
    throw StructuralError("switching signal references mode " + std::to_string(mode));
  return ssys.family[static_cast<size_t>(mode - 1)];
}

}  // namespace

SwitchRegime switchRegimeFromString(const std::string& s) {
  if (s == "known") return SwitchRegime::Known;
  if (s == "arbitrary") return SwitchRegime::Arbitrary;
  if (s == "uncertain") return SwitchRegime::Uncertain;
  throw ParameterError("unknown switching regime: " + s);
}

std::string switchRegimeName(SwitchRegime r) {
  switch (r) {
    case SwitchRegime::Known: return "known";
    case SwitchRegime::Arbitrary: return "arbitrary";
    case SwitchRegime::Uncertain: return "uncertain";
  }
  return "unknown";
}

IntervalPartition IntervalPartition::make(const SwitchedSystem& ssys, const TimeGrid& omega) {
  IntervalPartition part;
  const auto& resets = ssys.resettingTimes;
  const double t0 = omega.t0();
  const double tEnd = omega.end();
  const size_t h = resets.size();

  for (size_t j = 0; j < h; ++j) {
    const double d = ssys.deltaTAt(static_cast<int>(j));
    if (d < 0.0) throw PartitionError("reset window half-width must be >= 0");
    part.gamma.emplace_back(resets[j] - d, resets[j] + d);
  }
  for (size_t j = 0; j + 1 < h; ++j) {
    if (part.gamma[j].second >= part.gamma[j + 1].first)
      throw PartitionError("reset windows overlap: the resetting-time order must be certain");
  }
  if (h > 0) {
    if (part.gamma.front().first <= t0)
      throw PartitionError("first reset window must start strictly after t0");
    if (part.gamma.back().second >= tEnd)
      throw PartitionError("last reset window must end strictly before t0 + T");
  }

  if (h == 0) {
    part.psi.emplace_back(t0, tEnd);
    return part;
  }
  part.psi.emplace_back(t0, part.gamma[0].second);
  for (size_t j = 1; j < h; ++j)
    part.psi.emplace_back(part.gamma[j - 1].first, part.gamma[j].second);
  part.psi.emplace_back(part.gamma[h - 1].first, tEnd);
  return part;
}

int SwitchedPiece::indexOf(double t, double tol) const {
  for (size_t k = 0; k < nodes.size(); ++k)
    if (std::abs(nodes[k] - t) <= tol) return static_cast<int>(k);
  return -1;
}

SwitchedProblem buildKnownTimes(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                const TimeGrid& grid, const AnalysisOptions& opts) {
  for (size_t k = 0; k < ssys.resettingTimes.size(); ++k) {
    if (ssys.deltaTAt(static_cast<int>(k)) != 0.0)
      throw ParameterError("known-times condition requires zero reset-window half-widths");
  }
  const double tol = grid.clampTolerance();
  for (double tk : ssys.resettingTimes)
    if (tk <= grid.t0() + tol || tk >= grid.end() - tol)
      throw StructuralError("reset at t=" + std::to_string(tk) + " lies outside the window");

  SwitchedProblem problem;
  problem.partition = IntervalPartition::make(ssys, grid);
  const std::vector<double> allNodes = insertNodes(grid.nodes(), ssys.resettingTimes, tol);
  const std::vector<int> modes = modeSequence(ssys, grid);
  const double xi = autoXiSwitch(opts);

  // Segment boundaries: [t0, t_1], [t_1, t_2], ..., [t_h, tEnd].
  std::vector<double> bounds{grid.t0()};
  bounds.insert(bounds.end(), ssys.resettingTimes.begin(), ssys.resettingTimes.end());
  bounds.push_back(grid.end());

  for (size_t j = 0; j + 1 < bounds.size(); ++j) {
    SwitchedPiece piece;
    piece.mode = modes[j];
    piece.nodes = nodesBetween(allNodes, bounds[j], bounds[j + 1], tol);
    const int n = familyMode(ssys, piece.mode).stateDim();
    for (size_t k = 0; k < piece.nodes.size(); ++k)
      piece.P.push_back(problem.lmis.layout.addSymmetric(
          "P" + std::to_string(j + 1) + "@" + std::to_string(k), n));
    problem.pieces.push_back(std::move(piece));
  }

  for (size_t j = 0; j < problem.pieces.size(); ++j) {
    const auto& piece = problem.pieces[j];
    const LtvSystem& mode = familyMode(ssys, piece.mode);
    addPieceDynamics(problem.lmis, piece, mode, spec,
                     checkpointAlphas(opts, {&mode.A, &mode.G, &spec.R}),
                     "seg" + std::to_string(j + 1));
  }
  for (size_t j = 0; j + 1 < problem.pieces.size(); ++j) {
    const double tk = ssys.resettingTimes[j];
    addJumpBlock(problem.lmis, problem.pieces[j].P.back(), problem.pieces[j + 1].P.front(),
                 ssys.J, tk, "jump@" + std::to_string(tk));
  }
  for (size_t j = 0; j < problem.pieces.size(); ++j) {
    const auto& piece = problem.pieces[j];
    addPieceNodeBounds(problem.lmis, piece, familyMode(ssys, piece.mode), spec, xi,
                       opts.literalTimeWeight, "seg" + std::to_string(j + 1));
  }
  return problem;
}

SwitchedProblem buildArbitrarySwitching(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                        const TimeGrid& grid, const AnalysisOptions& opts) {
  for (size_t p = 1; p < ssys.family.size(); ++p)
    if (ssys.family[p].stateDim() != ssys.family[0].stateDim())
      throw StructuralError("arbitrary switching requires equal state dimensions");

  SwitchedProblem problem;
  problem.partition.psi.emplace_back(grid.t0(), grid.end());
  const double xi = autoXiSwitch(opts);

  SwitchedPiece piece;
  piece.mode = 1;
  piece.nodes = grid.nodes();
  const int n = ssys.family[0].stateDim();
  for (size_t k = 0; k < piece.nodes.size(); ++k)
    piece.P.push_back(problem.lmis.layout.addSymmetric("P@" + std::to_string(k), n));
  problem.pieces.push_back(std::move(piece));
  const auto& thePiece = problem.pieces[0];

  for (int i = 1; i <= ssys.modeCount(); ++i) {
    const LtvSystem& mode = familyMode(ssys, i);
    addPieceDynamics(problem.lmis, thePiece, mode, spec,
                     checkpointAlphas(opts, {&mode.A, &mode.G, &spec.R}),
                     "mode" + std::to_string(i));
  }
  for (size_t k = 0; k < thePiece.nodes.size(); ++k)
    addJumpBlock(problem.lmis, thePiece.P[k], thePiece.P[k], ssys.J, thePiece.nodes[k],
                 "jump@" + std::to_string(thePiece.nodes[k]));
  for (int i = 1; i <= ssys.modeCount(); ++i) {
    const LtvSystem& mode = familyMode(ssys, i);
    const int nn = mode.stateDim();
    for (size_t k = 0; k < thePiece.nodes.size(); ++k) {
      const double t = thePiece.nodes[k];
      const MatrixXd Ct = mode.C.eval(t);
      const MatrixXd bound = xi * Ct.transpose() *
                             internal::effectiveOutputWeight(spec, t, opts.literalTimeWeight) *
                             Ct;
      internal::addNodeBoundBlock(problem.lmis, thePiece.P[k],
                                  0.5 * (bound + bound.transpose()),
                                  "mode" + std::to_string(i) + "-output@" + std::to_string(k));
      if (i == 1)
        internal::addNodeBoundBlock(problem.lmis, thePiece.P[k], MatrixXd::Zero(nn, nn),
                                    "positivity@" + std::to_string(k));
    }
  }
  return problem;
}

SwitchedProblem buildUncertainSwitching(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                        const TimeGrid& grid, const AnalysisOptions& opts) {
  SwitchedProblem problem;
  problem.partition = IntervalPartition::make(ssys, grid);
  const double tol = grid.clampTolerance();

  std::vector<double> extra = ssys.resettingTimes;
  for (const auto& [lo, hi] : problem.partition.gamma) {
    extra.push_back(lo);
    extra.push_back(hi);
  }
  const std::vector<double> allNodes = insertNodes(grid.nodes(), extra, tol);
  const std::vector<int> modes = modeSequence(ssys, grid);
  const double xi = autoXiSwitch(opts);

  for (size_t j = 0; j < problem.partition.psi.size(); ++j) {
    SwitchedPiece piece;
    piece.mode = modes[j];
    piece.nodes =
        nodesBetween(allNodes, problem.partition.psi[j].first, problem.partition.psi[j].second, tol);
    const int n = familyMode(ssys, piece.mode).stateDim();
    for (size_t k = 0; k < piece.nodes.size(); ++k)
      piece.P.push_back(problem.lmis.layout.addSymmetric(
          "P" + std::to_string(j + 1) + "@" + std::to_string(k), n));
    problem.pieces.push_back(std::move(piece));
  }

  for (size_t j = 0; j < problem.pieces.size(); ++j) {
    const auto& piece = problem.pieces[j];
    const LtvSystem& mode = familyMode(ssys, piece.mode);
    addPieceDynamics(problem.lmis, piece, mode, spec,
                     checkpointAlphas(opts, {&mode.A, &mode.G, &spec.R}),
                     "psi" + std::to_string(j + 1));
  }
  for (size_t j = 0; j < problem.partition.gamma.size(); ++j) {
    const auto& [lo, hi] = problem.partition.gamma[j];
    for (double t : nodesBetween(allNodes, lo, hi, tol)) {
      const int kMinus = problem.pieces[j].indexOf(t, tol);
      const int kPlus = problem.pieces[j + 1].indexOf(t, tol);
      if (kMinus < 0 || kPlus < 0)
        throw StructuralError("reset-window node missing from an adjacent piece");
      addJumpBlock(problem.lmis, problem.pieces[j].P[static_cast<size_t>(kMinus)],
                   problem.pieces[j + 1].P[static_cast<size_t>(kPlus)], ssys.J, t,
                   "jump@" + std::to_string(t));
    }
  }
  for (size_t j = 0; j < problem.pieces.size(); ++j) {
    const auto& piece = problem.pieces[j];
    addPieceNodeBounds(problem.lmis, piece, familyMode(ssys, piece.mode), spec, xi,
                       opts.literalTimeWeight, "psi" + std::to_string(j + 1));
  }
  return problem;
}

SwitchedVerdict certifySwitched(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                SwitchRegime regime, double ts, const SolveOptions& solveOpts,
                                int auditBudget, unsigned seed) {
  const TimeGrid grid = TimeGrid::fromNominalStep(spec.omega.t0(), spec.omega.horizon(), ts);
  IOFTSSpec gridded = spec;
  gridded.omega = grid;

  SwitchedProblem problem;
  switch (regime) {
    case SwitchRegime::Known: {
      SwitchedSystem exact = ssys;
      exact.deltaT.assign(ssys.resettingTimes.size(), 0.0);
      problem = buildKnownTimes(exact, gridded, grid);
      break;
    }
    case SwitchRegime::Arbitrary:
      problem = buildArbitrarySwitching(ssys, gridded, grid);
      break;
    case SwitchRegime::Uncertain:
      problem = buildUncertainSwitching(ssys, gridded, grid);
      break;
  }

  SwitchedVerdict verdict;
  verdict.feasibility = solveFeasibility(problem.lmis, solveOpts);
  if (verdict.feasibility.status == FeasibilityStatus::Feasible) {
    const auto margins = verifyCertificate(problem.lmis, verdict.feasibility.x);
    if (*std::min_element(margins.begin(), margins.end()) < solveOpts.margin)
      throw Error("switched certificate failed its audit");
    verdict.certified = true;
  }

  if (auditBudget > 0) {
    const WorstCaseResult wc = searchWorstCase(ssys, gridded, auditBudget, seed);
    verdict.auditPeak = wc.peak;
    verdict.auditRealization = wc.resetRealization;
    if (verdict.certified && wc.peak >= 1.0) {
      verdict.certified = false;
      verdict.soundnessViolated = true;
    }
  }
  return verdict;
}

}  // namespace iofts
