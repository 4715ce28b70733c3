#include "iofts/synthesis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

#include "iofts/errors.hpp"
#include "dlmi_block_util.hpp"

namespace iofts {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd inverseSpdChecked(const MatrixXd& M, const std::string& name,
                           std::vector<std::string>* warnings) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (lmin <= 0.0) throw SingularWeightError(name + " is not positive definite");
  if (warnings && lmax / lmin > 1e12)
    warnings->push_back(name + " condition number exceeds 1e12");
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

MatrixXd invertChecked(const MatrixXd& M, const char* what) {
  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (smin < 1e-10 * std::max(1.0, smax))
    throw ReconstructionError(std::string(what) + " is singular (min sv " +
                              std::to_string(smin) + ")");
  return svd.solve(MatrixXd::Identity(M.rows(), M.cols()));
}

}  // namespace

SynthesisProblem buildSynthesisDLMI(const LtvSystem& sys, const IOFTSSpec& spec,
                                    const TimeGrid& grid, const AnalysisOptions& opts) {
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("synthesis is posed for energy-bounded disturbances");
  if (!sys.B) throw StructuralError("synthesis needs a control input B");
  if (!sys.strictlyProper()) throw StructuralError("synthesis expects a strictly proper plant");

  const int n = sys.stateDim();
  const int r = sys.inputDim();
  const int m = sys.outputDim();
  const int mu = sys.controlDim();

  SynthesisProblem problem;
  problem.grid = grid;
  auto& layout = problem.lmis.layout;
  problem.S = PwlUnknown::symmetricOnGrid(layout, grid, n, "S");
  problem.T = PwlUnknown::symmetricOnGrid(layout, grid, n, "T");
  problem.AhatK = PwlUnknown::fullOnGrid(layout, grid, n, n, "Ahat");
  problem.BhatK = PwlUnknown::fullOnGrid(layout, grid, n, m, "Bhat");
  problem.ChatK = PwlUnknown::fullOnGrid(layout, grid, mu, n, "Chat");
  problem.DK = PwlUnknown::fullOnGrid(layout, grid, mu, m, "DK");

  const int cps = (opts.checkpoints > 0)
                      ? opts.checkpoints
                      : ((std::max({sys.A.degree(), sys.B->degree(), sys.G.degree(),
                                    sys.C.degree(), spec.R.degree()}) <= 1)
                             ? 2
                             : 4);
  std::vector<double> alphas;
  if (cps <= 2) {
    alphas = {0.0, 1.0};
  } else {
    for (int i = 0; i < cps; ++i) alphas.push_back(double(i) / (cps - 1));
  }

  const MatrixXd I_n = MatrixXd::Identity(n, n);

  // Closed-loop energy block at each subinterval checkpoint.
  for (int k = 0; k < grid.subintervals(); ++k) {
    const double tk = grid.node(k);
    const double tk1 = grid.node(k + 1);
    const double ts = tk1 - tk;
    for (double a : alphas) {
      const double t = internal::checkpointTime(tk, tk1, a);
      const MatrixXd At = sys.A.eval(t);
      const MatrixXd Bt = sys.B->eval(t);
      const MatrixXd Gt = sys.G.eval(t);
      const MatrixXd Ct = sys.C.eval(t);
      const MatrixXd Rinv = inverseSpdChecked(spec.R.eval(t), "R", &problem.warnings);
      const MatrixXd GRG = Gt * Rinv * Gt.transpose();

      LmiBlock block(2 * n + r, "synth-energy@" + std::to_string(k) + "+" + std::to_string(a));
      // Theta11 = -Sdot + A S + S A' + B Chat + Chat' B' + G R^-1 G'
      block.addTerm(0, 0, (-0.5 / ts) * I_n, problem.S.at(k + 1), I_n);
      block.addTerm(0, 0, (0.5 / ts) * I_n, problem.S.at(k), I_n);
      // Theta22 = Tdot + T A + A' T + Bhat C + C' Bhat'
      block.addTerm(n, n, (0.5 / ts) * I_n, problem.T.at(k + 1), I_n);
      block.addTerm(n, n, (-0.5 / ts) * I_n, problem.T.at(k), I_n);
      block.addConstant(0, 0, 0.5 * (GRG + GRG.transpose()));
      block.addConstant(0, n, At);

      const std::pair<int, double> weights[] = {{k, 1.0 - a}, {k + 1, a}};
      for (const auto& [node, w] : weights) {
        if (w <= 0.0) continue;
        block.addTerm(0, 0, w * At, problem.S.at(node), I_n);
        block.addTerm(0, 0, w * Bt, problem.ChatK.at(node), I_n);
        // Theta12 = A + Ahat' + B DK C + G R^-1 G' T
        block.addTerm(0, n, w * I_n, problem.AhatK.at(node), I_n, /*transposeUnknown=*/true);
        block.addTerm(0, n, w * Bt, problem.DK.at(node), Ct);
        block.addTerm(0, n, w * GRG, problem.T.at(node), I_n);
        block.addTerm(n, n, w * I_n, problem.T.at(node), At);
        block.addTerm(n, n, w * I_n, problem.BhatK.at(node), Ct);
        // T G in the disturbance column
        block.addTerm(n, 2 * n, w * I_n, problem.T.at(node), Gt);
      }
      block.addConstant(2 * n, 2 * n, (-spec.R.eval(t)).eval());
      problem.lmis.blocks.push_back(std::move(block));
    }
  }

  // Output block (stored negated) and the coupling block at each node.
  for (int k = 0; k < grid.nodeCount(); ++k) {
    const double t = grid.node(k);
    const MatrixXd Ct = sys.C.eval(t);
    const MatrixXd Qt = spec.Q.eval(t);
    const MatrixXd Qinv = inverseSpdChecked(Qt, "Q", &problem.warnings);
    const MatrixXd CQC = Ct.transpose() * Qt * Ct;

    LmiBlock out(2 * n + m, "synth-output@" + std::to_string(k));
    // -Xi11 = -T + C'QC
    out.addTerm(0, 0, -0.5 * I_n, problem.T.at(k), I_n);
    out.addConstant(0, 0, 0.5 * (CQC + CQC.transpose()));
    // -Xi12 = -I + C'QC S
    out.addConstant(0, n, (-I_n).eval());
    out.addTerm(0, n, CQC, problem.S.at(k), I_n);
    // -S block and -S C'
    out.addTerm(n, n, -0.5 * I_n, problem.S.at(k), I_n);
    out.addTerm(n, 2 * n, -I_n, problem.S.at(k), Ct.transpose());
    out.addConstant(2 * n, 2 * n, (-Qinv).eval());
    problem.lmis.blocks.push_back(std::move(out));

    LmiBlock coupling(2 * n, "synth-coupling@" + std::to_string(k));
    coupling.addTerm(0, 0, -0.5 * I_n, problem.S.at(k), I_n);
    coupling.addConstant(0, n, (-I_n).eval());
    coupling.addTerm(n, n, -0.5 * I_n, problem.T.at(k), I_n);
    problem.lmis.blocks.push_back(std::move(coupling));
  }

  return problem;
}

SynthesisSolution extractSynthesis(const SynthesisProblem& problem, const VectorXd& x) {
  SynthesisSolution sol;
  sol.grid = problem.grid;
  for (int k = 0; k < problem.grid.nodeCount(); ++k) {
    sol.S.push_back(problem.S.value(x, k));
    sol.T.push_back(problem.T.value(x, k));
    sol.Ahat.push_back(problem.AhatK.value(x, k));
    sol.Bhat.push_back(problem.BhatK.value(x, k));
    sol.Chat.push_back(problem.ChatK.value(x, k));
    sol.DK.push_back(problem.DK.value(x, k));
  }
  return sol;
}

namespace {

/// Forward difference on the grid, backward at the last node.
MatrixXd gridDerivative(const std::vector<MatrixXd>& values, const TimeGrid& grid, int k) {
  const int last = grid.nodeCount() - 1;
  if (k < last) return (values[k + 1] - values[k]) / (grid.node(k + 1) - grid.node(k));
  return (values[last] - values[last - 1]) / (grid.node(last) - grid.node(last - 1));
}

}  // namespace

Controller reconstructController(const SynthesisSolution& sol, const LtvSystem& sys,
                                 const MatrixFunction& Nchoice) {
  const TimeGrid& grid = sol.grid;
  const int n = sys.stateDim();
  const int nodeCount = grid.nodeCount();
  if (static_cast<int>(sol.S.size()) != nodeCount)
    throw StructuralError("reconstructController: solution does not match its grid");

  // Coupling check and M at every node first (Mdot needs neighbors).
  std::vector<MatrixXd> M(static_cast<size_t>(nodeCount));
  std::vector<MatrixXd> Ninv(static_cast<size_t>(nodeCount));
  for (int k = 0; k < nodeCount; ++k) {
    const double t = grid.node(k);
    MatrixXd coupled(2 * n, 2 * n);
    coupled << sol.S[k], MatrixXd::Identity(n, n), MatrixXd::Identity(n, n), sol.T[k];
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(coupled, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw CouplingError("[[S, I], [I, T]] not positive definite at t=" + std::to_string(t));

    const MatrixXd Nt = Nchoice.eval(t);
    Ninv[k] = invertChecked(Nt, "N");
    M[k] = (MatrixXd::Identity(n, n) - sol.T[k] * sol.S[k]) * Ninv[k].transpose();
  }

  Controller ctrl;
  std::vector<MatrixXd> AK, BK, CK;
  for (int k = 0; k < nodeCount; ++k) {
    const double t = grid.node(k);
    const MatrixXd At = sys.A.eval(t);
    const MatrixXd Bt = sys.B->eval(t);
    const MatrixXd Ct = sys.C.eval(t);
    const MatrixXd Nt = Nchoice.eval(t);
    const MatrixXd Minv = invertChecked(M[k], "M = (I - T S) N^-T");
    const MatrixXd NinvT = Ninv[k].transpose();

    const MatrixXd Tdot = gridDerivative(sol.T, grid, k);
    const MatrixXd Mdot = gridDerivative(M, grid, k);

    const MatrixXd BKk = Minv * (sol.Bhat[k] - sol.T[k] * Bt * sol.DK[k]);
    const MatrixXd CKk = (sol.Chat[k] - sol.DK[k] * Ct * sol.S[k]) * NinvT;
    const MatrixXd AKk =
        Minv *
        (sol.Ahat[k] - Tdot * sol.S[k] - Mdot * Nt.transpose() -
         sol.T[k] * Bt * CKk * Nt.transpose() - M[k] * BKk * Ct * sol.S[k] -
         sol.T[k] * (At + Bt * sol.DK[k] * Ct) * sol.S[k]) *
        NinvT;
    AK.push_back(AKk);
    BK.push_back(BKk);
    CK.push_back(CKk);
  }

  const auto nodes = grid.nodes();
  ctrl.AK = MatrixFunction::sampled(nodes, AK);
  ctrl.BK = MatrixFunction::sampled(nodes, BK);
  ctrl.CK = MatrixFunction::sampled(nodes, CK);
  ctrl.DK = MatrixFunction::sampled(nodes, sol.DK);
  return ctrl;
}

Controller reconstructController(const SynthesisSolution& sol, const LtvSystem& sys) {
  return reconstructController(sol, sys, MatrixFunction::identity(sys.stateDim()));
}

HatRecomputation recomputeHats(const SynthesisSolution& sol, const Controller& ctrl,
                               const LtvSystem& sys, const MatrixFunction& Nchoice) {
  const TimeGrid& grid = sol.grid;
  const int n = sys.stateDim();
  const int nodeCount = grid.nodeCount();

  std::vector<MatrixXd> M(static_cast<size_t>(nodeCount));
  for (int k = 0; k < nodeCount; ++k) {
    const double t = grid.node(k);
    const MatrixXd Ninv = invertChecked(Nchoice.eval(t), "N");
    M[k] = (MatrixXd::Identity(n, n) - sol.T[k] * sol.S[k]) * Ninv.transpose();
  }

  HatRecomputation out;
  for (int k = 0; k < nodeCount; ++k) {
    const double t = grid.node(k);
    const MatrixXd At = sys.A.eval(t);
    const MatrixXd Bt = sys.B->eval(t);
    const MatrixXd Ct = sys.C.eval(t);
    const MatrixXd Nt = Nchoice.eval(t);
    const MatrixXd AKk = ctrl.AK.eval(t);
    const MatrixXd BKk = ctrl.BK.eval(t);
    const MatrixXd CKk = ctrl.CK.eval(t);
    const MatrixXd DKk = ctrl.DK.eval(t);
    const MatrixXd Tdot = gridDerivative(sol.T, grid, k);
    const MatrixXd Mdot = gridDerivative(M, grid, k);

    out.Bhat.push_back(M[k] * BKk + sol.T[k] * Bt * DKk);
    out.Chat.push_back(CKk * Nt.transpose() + DKk * Ct * sol.S[k]);
    out.Ahat.push_back(Tdot * sol.S[k] + Mdot * Nt.transpose() +
                       M[k] * AKk * Nt.transpose() + sol.T[k] * Bt * CKk * Nt.transpose() +
                       M[k] * BKk * Ct * sol.S[k] +
                       sol.T[k] * (At + Bt * DKk * Ct) * sol.S[k]);
  }
  return out;
}

LtvSystem closedLoop(const LtvSystem& sys, const Controller& ctrl,
                     const std::vector<double>& nodes) {
  const int n = sys.stateDim();
  const int nc = ctrl.order();
  const int r = sys.inputDim();
  const int m = sys.outputDim();

  std::vector<MatrixXd> Acl, Gcl, Ccl;
  Acl.reserve(nodes.size());
  for (double t : nodes) {
    const MatrixXd At = sys.A.eval(t);
    const MatrixXd Bt = sys.B ? sys.B->eval(t) : MatrixXd::Zero(n, ctrl.CK.rows());
    const MatrixXd Ct = sys.C.eval(t);
    MatrixXd A(n + nc, n + nc);
    A << At + Bt * ctrl.DK.eval(t) * Ct, Bt * ctrl.CK.eval(t), ctrl.BK.eval(t) * Ct,
        ctrl.AK.eval(t);
    MatrixXd G = MatrixXd::Zero(n + nc, r);
    G.topRows(n) = sys.G.eval(t);
    MatrixXd C = MatrixXd::Zero(m, n + nc);
    C.leftCols(n) = Ct;
    Acl.push_back(A);
    Gcl.push_back(G);
    Ccl.push_back(C);
  }
  return LtvSystem{MatrixFunction::sampled(nodes, Acl), std::nullopt,
                   MatrixFunction::sampled(nodes, Gcl), MatrixFunction::sampled(nodes, Ccl),
                   std::nullopt};
}

}  // namespace iofts
