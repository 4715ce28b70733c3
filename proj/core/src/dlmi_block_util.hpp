#pragma once

// Internal helpers shared by the analysis and switching DLMI builders. The
// degenerate single-mode switched problem must reproduce the plain analysis
// blocks exactly, so both paths assemble through these.

#include <Eigen/Core>
#include <string>

#include "iofts/lmi.hpp"
#include "iofts/matrix_function.hpp"
#include "iofts/systems.hpp"

namespace iofts::internal {

inline double checkpointTime(double tk, double tk1, double alpha) {
  if (alpha <= 0.0) return tk;
  if (alpha >= 1.0) return tk1;
  return tk + alpha * (tk1 - tk);
}

/// [[Pdot + A'P + PA, PG], [G'P, -R]] < 0 at one subinterval checkpoint,
/// with P interpolated between the two node unknowns and Pdot their
/// difference quotient.
inline void addDlmiCheckpointBlock(AffineLmiSystem& sys, const UnknownRef& Pk,
                                   const UnknownRef& Pk1, double tk, double tk1, double alpha,
                                   const MatrixFunction& A, const MatrixFunction& G,
                                   const MatrixFunction& R, const std::string& label) {
  const int n = Pk.rows;
  const double ts = tk1 - tk;
  const double t = checkpointTime(tk, tk1, alpha);
  const Eigen::MatrixXd At = A.eval(t);
  const Eigen::MatrixXd Gt = G.eval(t);
  const Eigen::MatrixXd Rt = R.eval(t);
  const int r = static_cast<int>(Gt.cols());
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

  LmiBlock block(n + r, label);
  block.addTerm(0, 0, (0.5 / ts) * I, Pk1, I);
  block.addTerm(0, 0, (-0.5 / ts) * I, Pk, I);
  if (alpha < 1.0) {
    block.addTerm(0, 0, (1.0 - alpha) * At.transpose(), Pk, I);
    block.addTerm(0, n, (1.0 - alpha) * I, Pk, Gt);
  }
  if (alpha > 0.0) {
    block.addTerm(0, 0, alpha * At.transpose(), Pk1, I);
    block.addTerm(0, n, alpha * I, Pk1, Gt);
  }
  block.addConstant(n, n, (-Rt).eval());
  sys.blocks.push_back(std::move(block));
}

/// -P + shift < 0 at a node (P > shift; zero shift = positivity).
inline void addNodeBoundBlock(AffineLmiSystem& sys, const UnknownRef& Pk,
                              const Eigen::MatrixXd& shift, const std::string& label) {
  const int n = Pk.rows;
  LmiBlock block(n, label);
  block.addTerm(0, 0, -0.5 * Eigen::MatrixXd::Identity(n, n), Pk,
                Eigen::MatrixXd::Identity(n, n));
  if (shift.size() > 0 && shift.cwiseAbs().maxCoeff() > 0.0) block.addConstant(0, 0, shift);
  sys.blocks.push_back(std::move(block));
}

/// Output weight at a node: Q for energy-bounded specs, (t - t0) Q (or t Q
/// with the literal flag) for amplitude-bounded ones.
inline Eigen::MatrixXd effectiveOutputWeight(const IOFTSSpec& spec, double t,
                                             bool literalTimeWeight) {
  const Eigen::MatrixXd Qt = spec.Q.eval(t);
  if (spec.signalClass == SignalClass::W2) return Qt;
  const double weight = literalTimeWeight ? t : (t - spec.omega.t0());
  return weight * Qt;
}

}  // namespace iofts::internal
