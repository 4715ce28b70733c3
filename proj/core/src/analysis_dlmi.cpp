#include "iofts/analysis_dlmi.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <random>

#include "iofts/errors.hpp"
#include "iofts/simulate.hpp"
#include "dlmi_block_util.hpp"

namespace iofts {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int autoCheckpoints(const AnalysisOptions& opts,
                    std::initializer_list<const MatrixFunction*> data) {
  if (opts.checkpoints > 0) return opts.checkpoints;
  int degree = 0;
  bool breakpoints = false;
  for (const MatrixFunction* f : data) {
    if (f->empty()) continue;
    degree = std::max(degree, f->degree());
    breakpoints = breakpoints || f->hasBreakpoints();
  }
  return (degree <= 1 && !breakpoints) ? 2 : 4;
}

double autoXi(const AnalysisOptions& opts, std::initializer_list<const MatrixFunction*> data) {
  if (opts.xi > 0.0) return opts.xi;
  for (const MatrixFunction* f : data)
    if (!f->empty() && f->hasBreakpoints()) return 1.01;
  return 1.0;
}

std::vector<double> checkpointAlphas(int count) {
  if (count <= 2) return {0.0, 1.0};
  std::vector<double> alphas(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) alphas[static_cast<size_t>(i)] = double(i) / (count - 1);
  return alphas;
}

AnalysisProblem buildAnalysisCommon(const LtvSystem& sys, const IOFTSSpec& spec,
                                    const TimeGrid& grid, const AnalysisOptions& opts,
                                    double outputScale) {
  if (sys.A.rows() != sys.A.cols() || sys.G.rows() != sys.A.rows() ||
      sys.C.cols() != sys.A.rows())
    throw StructuralError("analysis DLMI: plant dimensions are inconsistent");
  if (spec.R.rows() != sys.G.cols() || spec.Q.rows() != sys.C.rows())
    throw StructuralError("analysis DLMI: weight dimensions do not match the plant");

  AnalysisProblem problem;
  problem.grid = grid;
  problem.P = PwlUnknown::symmetricOnGrid(problem.lmis.layout, grid, sys.stateDim(), "P");

  const int cps = autoCheckpoints(opts, {&sys.A, &sys.G, &spec.R});
  const double xi = autoXi(opts, {&sys.A, &sys.G, &sys.C, &spec.R, &spec.Q});
  const auto alphas = checkpointAlphas(cps);

  for (int k = 0; k < grid.subintervals(); ++k) {
    for (double a : alphas) {
      internal::addDlmiCheckpointBlock(problem.lmis, problem.P.at(k), problem.P.at(k + 1),
                                       grid.node(k), grid.node(k + 1), a, sys.A, sys.G, spec.R,
                                       "dlmi@" + std::to_string(k) + "+" + std::to_string(a));
    }
  }
  for (int k = 0; k < grid.nodeCount(); ++k) {
    const double t = grid.node(k);
    const MatrixXd Ct = sys.C.eval(t);
    const MatrixXd bound = outputScale * xi * Ct.transpose() *
                           internal::effectiveOutputWeight(spec, t, opts.literalTimeWeight) * Ct;
    internal::addNodeBoundBlock(problem.lmis, problem.P.at(k),
                                0.5 * (bound + bound.transpose()),
                                "output@" + std::to_string(k));
    internal::addNodeBoundBlock(problem.lmis, problem.P.at(k),
                                MatrixXd::Zero(sys.stateDim(), sys.stateDim()),
                                "positivity@" + std::to_string(k));
  }
  return problem;
}

}  // namespace

AnalysisProblem buildW2Analysis(const LtvSystem& sys, const IOFTSSpec& spec,
                                const TimeGrid& grid, const AnalysisOptions& opts) {
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("buildW2Analysis expects an energy-bounded spec");
  if (!sys.strictlyProper())
    throw StructuralError("buildW2Analysis expects a strictly proper plant");
  return buildAnalysisCommon(sys, spec, grid, opts, 1.0);
}

AnalysisProblem buildWinfAnalysis(const LtvSystem& sys, const IOFTSSpec& spec,
                                  const TimeGrid& grid, const AnalysisOptions& opts) {
  if (spec.signalClass != SignalClass::Winf)
    throw ParameterError("buildWinfAnalysis expects an amplitude-bounded spec");
  if (!sys.strictlyProper())
    throw StructuralError("buildWinfAnalysis expects a strictly proper plant");
  return buildAnalysisCommon(sys, spec, grid, opts, 1.0);
}

AnalysisProblem buildNonProperW2(const LtvSystem& sys, const IOFTSSpec& spec,
                                 const TimeGrid& grid, double theta,
                                 const AnalysisOptions& opts) {
  if (theta <= 1.0) throw ParameterError("theta must exceed 1");
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("buildNonProperW2 expects an energy-bounded spec");

  AnalysisProblem problem = buildAnalysisCommon(sys, spec, grid, opts, 2.0 * theta);

  // (theta - 1) R > 2 theta D'QD per node (constant in P).
  const int r = sys.inputDim();
  for (int k = 0; k < grid.nodeCount(); ++k) {
    const double t = grid.node(k);
    const MatrixXd Dt = sys.D ? sys.D->eval(t) : MatrixXd::Zero(sys.outputDim(), r);
    const MatrixXd block = 2.0 * theta * Dt.transpose() * spec.Q.eval(t) * Dt -
                           (theta - 1.0) * spec.R.eval(t);
    LmiBlock weightBlock(r, "direct-term@" + std::to_string(k));
    weightBlock.addConstant(0, 0, 0.5 * (block + block.transpose()));
    problem.lmis.blocks.push_back(std::move(weightBlock));
  }
  return problem;
}

const std::vector<double>& thetaGrid() {
  static const std::vector<double> grid{1.1, 2.0, 5.0, 10.0, 100.0};
  return grid;
}

AnalysisProblem buildRobustW2(const UncertainLtvSystem& usys, const IOFTSSpec& spec,
                              const TimeGrid& grid, const RobustConstants& consts,
                              const AnalysisOptions& opts) {
  if (consts.theta <= 1.0) throw ParameterError("theta must exceed 1");
  if (consts.c1 <= 0.0 || consts.c2 <= 0.0 || consts.c3 <= 0.0 || consts.c4 <= 0.0)
    throw ParameterError("multipliers c1..c4 must be positive");
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("buildRobustW2 expects an energy-bounded spec");

  const LtvSystem& base = usys.base;
  const MatrixFunction& channel = base.B ? *base.B : base.G;  // disturbance input slot
  const int n = base.stateDim();
  const int r = channel.cols();
  const int q = usys.F1.cols();
  const int m = base.outputDim();
  const double th = consts.theta;

  if (usys.F1.rows() != n || usys.F2.rows() != m || usys.E1.cols() != n ||
      usys.E2.cols() != r || usys.H.cols() != q || usys.H.rows() != usys.E1.rows())
    throw StructuralError("uncertainty block dimensions are inconsistent");

  AnalysisProblem problem;
  problem.grid = grid;
  problem.P = PwlUnknown::symmetricOnGrid(problem.lmis.layout, grid, n, "P");

  const int cps = autoCheckpoints(
      opts, {&base.A, &channel, &spec.R, &usys.F1, &usys.E1, &usys.E2, &usys.H});
  const double xi =
      autoXi(opts, {&base.A, &channel, &base.C, &spec.R, &spec.Q, &usys.F1, &usys.H});
  const auto alphas = checkpointAlphas(cps);
  const MatrixXd I_n = MatrixXd::Identity(n, n);
  const MatrixXd I_q = MatrixXd::Identity(q, q);

  // The multiplier blocks need I - H'H > 0.
  for (int k = 0; k < grid.nodeCount(); ++k) {
    const MatrixXd Ht = usys.H.eval(grid.node(k));
    if (Ht.size() == 0) break;
    Eigen::JacobiSVD<MatrixXd> svd(Ht);
    if (svd.singularValues().size() > 0 && svd.singularValues()(0) >= 1.0) {
      problem.structuralInfeasibility =
          "uncertainty gain ||H|| >= 1 at t=" + std::to_string(grid.node(k));
      break;
    }
  }

  for (int k = 0; k < grid.subintervals(); ++k) {
    for (double a : alphas) {
      const double t = internal::checkpointTime(grid.node(k), grid.node(k + 1), a);
      const MatrixXd At = base.A.eval(t);
      const MatrixXd Bt = channel.eval(t);
      const MatrixXd F1t = usys.F1.eval(t);
      const MatrixXd E1t = usys.E1.eval(t);
      const MatrixXd E2t = usys.E2.eval(t);
      const MatrixXd Ht = usys.H.eval(t);
      const MatrixXd Rt = spec.R.eval(t);

      LmiBlock block(n + r + 2 * q,
                     "robust-dlmi@" + std::to_string(k) + "+" + std::to_string(a));
      const double ts = grid.node(k + 1) - grid.node(k);
      block.addTerm(0, 0, (0.5 / ts) * I_n, problem.P.at(k + 1), I_n);
      block.addTerm(0, 0, (-0.5 / ts) * I_n, problem.P.at(k), I_n);
      const std::pair<int, double> weights[] = {{k, 1.0 - a}, {k + 1, a}};
      for (const auto& [node, wgt] : weights) {
        if (wgt <= 0.0) continue;
        block.addTerm(0, 0, wgt * At.transpose(), problem.P.at(node), I_n);
        block.addTerm(0, n, wgt * I_n, problem.P.at(node), Bt);
        block.addTerm(0, n + r, wgt * I_n, problem.P.at(node), F1t);
        block.addTerm(0, n + r + q, wgt * I_n, problem.P.at(node), F1t);
      }
      block.addConstant(0, 0, (consts.c1 * E1t.transpose() * E1t).eval());
      if (q > 0) block.addConstant(0, n + r, (consts.c1 * E1t.transpose() * Ht).eval());
      block.addConstant(n, n, (consts.c2 * E2t.transpose() * E2t - Rt).eval());
      if (q > 0) block.addConstant(n, n + r + q, (consts.c2 * E2t.transpose() * Ht).eval());
      if (q > 0) {
        block.addConstant(n + r, n + r, (-consts.c1 * (I_q - Ht.transpose() * Ht)).eval());
        block.addConstant(n + r + q, n + r + q,
                          (-consts.c2 * (I_q - Ht.transpose() * Ht)).eval());
      }
      problem.lmis.blocks.push_back(std::move(block));
    }
  }

  for (int k = 0; k < grid.nodeCount(); ++k) {
    const double t = grid.node(k);
    const MatrixXd Ct = base.C.eval(t);
    const MatrixXd Dt = base.D ? base.D->eval(t) : MatrixXd::Zero(m, r);
    const MatrixXd F2t = usys.F2.eval(t);
    const MatrixXd E1t = usys.E1.eval(t);
    const MatrixXd E2t = usys.E2.eval(t);
    const MatrixXd Ht = usys.H.eval(t);
    const MatrixXd Qt = spec.Q.eval(t);
    const MatrixXd Rt = spec.R.eval(t);

    {
      LmiBlock blk(r + q, "robust-direct@" + std::to_string(k));
      const MatrixXd tl = 2.0 * th * Dt.transpose() * Qt * Dt + Rt - th * Rt +
                          consts.c3 * E2t.transpose() * E2t;
      blk.addConstant(0, 0, 0.5 * (tl + tl.transpose()));
      if (q > 0) {
        blk.addConstant(0, r,
                        (2.0 * th * Dt.transpose() * Qt * F2t +
                         consts.c3 * E2t.transpose() * Ht)
                            .eval());
        const MatrixXd br = 2.0 * th * F2t.transpose() * Qt * F2t -
                            consts.c3 * (I_q - Ht.transpose() * Ht);
        blk.addConstant(r, r, 0.5 * (br + br.transpose()));
      }
      problem.lmis.blocks.push_back(std::move(blk));
    }
    {
      LmiBlock blk(n + q, "robust-output@" + std::to_string(k));
      blk.addTerm(0, 0, -0.5 * I_n, problem.P.at(k), I_n);
      const MatrixXd tl =
          xi * 2.0 * th * Ct.transpose() * Qt * Ct + consts.c4 * E1t.transpose() * E1t;
      blk.addConstant(0, 0, 0.5 * (tl + tl.transpose()));
      if (q > 0) {
        blk.addConstant(0, n,
                        (2.0 * th * Ct.transpose() * Qt * F2t +
                         consts.c4 * E1t.transpose() * Ht)
                            .eval());
        const MatrixXd br = 2.0 * th * F2t.transpose() * Qt * F2t -
                            consts.c4 * (I_q - Ht.transpose() * Ht);
        blk.addConstant(n, n, 0.5 * (br + br.transpose()));
      }
      problem.lmis.blocks.push_back(std::move(blk));
    }
    internal::addNodeBoundBlock(problem.lmis, problem.P.at(k), MatrixXd::Zero(n, n),
                                "positivity@" + std::to_string(k));
  }
  return problem;
}

FeasibilityResult solveAnalysis(const AnalysisProblem& problem, const SolveOptions& opts) {
  if (problem.structuralInfeasibility) {
    FeasibilityResult result;
    result.status = FeasibilityStatus::InfeasibleAtTolerance;
    result.x = VectorXd::Zero(problem.lmis.numVars());
    result.distance = std::numeric_limits<double>::infinity();
    return result;
  }
  FeasibilityResult result = solveFeasibility(problem.lmis, opts);
  if (result.status == FeasibilityStatus::Feasible) {
    const auto margins = verifyCertificate(problem.lmis, result.x);
    const double worst = *std::min_element(margins.begin(), margins.end());
    if (worst < opts.margin)
      throw Error("analysis solve: certificate failed its audit (margin " +
                  std::to_string(worst) + ")");
    result.achievedMargin = worst;
  }
  return result;
}

Eigen::VectorXd liftPwlCertificate(const PwlUnknown& coarseP, const VectorXd& x,
                                   const TimeGrid& fineGrid) {
  VarLayout layout;
  PwlUnknown fineP = PwlUnknown::symmetricOnGrid(layout, fineGrid, coarseP.rows, "P");
  VectorXd out = VectorXd::Zero(layout.count());
  for (int k = 0; k < fineGrid.nodeCount(); ++k) {
    const MatrixXd M = coarseP.interpolate(x, fineGrid.node(k));
    const UnknownRef& ref = fineP.at(k);
    for (int j = 0; j < ref.cols; ++j)
      for (int i = j; i < ref.rows; ++i) out(ref.varIndex(i, j)) = M(i, j);
  }
  return out;
}

QmaxSearch findQmaxDlmi(const std::function<AnalysisProblem(double)>& builder, double qHi,
                        double absTol, const SolveOptions& solveOpts,
                        const QmaxSearchOptions& searchOpts) {
  QmaxSearch search;
  if (searchOpts.warmCertificate.size() > 0) search.certificate = searchOpts.warmCertificate;

  auto probe = [&](double qProbe) -> bool {
    const AnalysisProblem problem = builder(qProbe);
    if (problem.structuralInfeasibility) return false;
    if (search.certificate.size() == problem.lmis.numVars() && search.certificate.size() > 0) {
      const auto margins = verifyCertificate(problem.lmis, search.certificate);
      if (*std::min_element(margins.begin(), margins.end()) >= solveOpts.margin) return true;
    }
    SolveOptions opts = solveOpts;
    if (search.certificate.size() == problem.lmis.numVars()) opts.warmStart = search.certificate;
    ++search.solves;
    const FeasibilityResult result = solveAnalysis(problem, opts);
    if (result.status == FeasibilityStatus::Feasible) {
      search.certificate = result.x;
      return true;
    }
    return false;
  };

  double lo = 0.0;
  double hi = qHi;
  if (searchOpts.qLo > 0.0 && searchOpts.qLo < qHi && probe(searchOpts.qLo))
    lo = searchOpts.qLo;
  if (probe(hi)) {
    search.qmax = hi;
    return search;
  }
  while (hi - lo > absTol) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid))
      lo = mid;
    else
      hi = mid;
  }
  search.qmax = lo;
  return search;
}

double auditCertificateByTrajectories(const LtvSystem& sys, const IOFTSSpec& spec,
                                      const PwlUnknown& P, const VectorXd& x, int inputCount,
                                      unsigned seed) {
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("trajectory audit applies to energy-bounded certificates");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const TimeGrid simGrid = P.grid.refined(4);
  const auto nodes = simGrid.nodes();
  double worstV = 0.0;
  for (int trial = 0; trial < inputCount; ++trial) {
    InputSignal w;
    w.times = nodes;
    w.values.reserve(nodes.size());
    for (size_t k = 0; k < nodes.size(); ++k) {
      Eigen::VectorXd v(sys.inputDim());
      for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
      w.values.push_back(v);
    }
    const double energy = w.energy(spec.R);
    if (energy <= 0.0) continue;
    const double scale = 1.0 / std::sqrt(energy);
    for (auto& v : w.values) v *= scale;

    const Trajectory traj = integrateLTV(sys, spec, w, nodes);
    for (size_t k = 0; k < traj.times.size(); ++k) {
      const MatrixXd Pt = P.interpolate(x, traj.times[k]);
      worstV = std::max(worstV, traj.x[k].dot(Pt * traj.x[k]));
    }
  }
  return worstV;
}

}  // namespace iofts
