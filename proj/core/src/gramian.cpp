#include "iofts/gramian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "iofts/errors.hpp"

namespace iofts {

namespace {

Eigen::MatrixXd inverseSpd(const MatrixFunction& R, double t) {
  const Eigen::MatrixXd Rt = R.eval(t);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (Rt + Rt.transpose()));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, Rt.cwiseAbs().maxCoeff())) {
    throw SingularWeightError("R singular or indefinite at t=" + std::to_string(t));
  }
  return ldlt.solve(Eigen::MatrixXd::Identity(Rt.rows(), Rt.cols()));
}

Eigen::MatrixXd sqrtSpd(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
  return es.operatorSqrt();
}

Eigen::MatrixXd gramianRhs(const LtvSystem& sys, const MatrixFunction& R, double t,
                           const Eigen::MatrixXd& W) {
  const Eigen::MatrixXd At = sys.A.eval(t);
  const Eigen::MatrixXd Gt = sys.G.eval(t);
  return At * W + W * At.transpose() + Gt * inverseSpd(R, t) * Gt.transpose();
}

}  // namespace

GramianTrajectory solveDLE(const LtvSystem& sys, const IOFTSSpec& spec, const TimeGrid& grid,
                           IntegrationMethod method) {
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("the Gramian condition applies to energy-bounded (W2) disturbances");
  const int n = sys.stateDim();
  GramianTrajectory traj{grid, {}};
  traj.W.reserve(static_cast<size_t>(grid.nodeCount()));

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  traj.W.push_back(W);
  const double h = grid.step();
  for (int k = 0; k + 1 < grid.nodeCount(); ++k) {
    const double t = grid.node(k);
    if (method == IntegrationMethod::Euler) {
      W += h * gramianRhs(sys, spec.R, t, W);
    } else {
      const Eigen::MatrixXd k1 = gramianRhs(sys, spec.R, t, W);
      const Eigen::MatrixXd k2 = gramianRhs(sys, spec.R, t + 0.5 * h, W + 0.5 * h * k1);
      const Eigen::MatrixXd k3 = gramianRhs(sys, spec.R, t + 0.5 * h, W + 0.5 * h * k2);
      const Eigen::MatrixXd k4 = gramianRhs(sys, spec.R, t + h, W + h * k3);
      W += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    W = 0.5 * (W + W.transpose());
    if (!W.allFinite())
      throw DivergenceError("Gramian integration diverged at node " + std::to_string(k + 1) +
                            " (t=" + std::to_string(grid.node(k + 1)) + ")");
    traj.W.push_back(W);
  }
  return traj;
}

GramianVerdict checkCondition(const GramianTrajectory& traj, const MatrixFunction& C,
                              const MatrixFunction& Q) {
  GramianVerdict verdict;
  verdict.margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < traj.grid.nodeCount(); ++k) {
    const double t = traj.grid.node(k);
    const Eigen::MatrixXd Ct = C.eval(t);
    const Eigen::MatrixXd Qh = sqrtSpd(Q.eval(t));
    const Eigen::MatrixXd S = Qh * Ct * traj.W[static_cast<size_t>(k)] * Ct.transpose() * Qh;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()),
                                                      Eigen::EigenvaluesOnly);
    const double margin = 1.0 - es.eigenvalues().maxCoeff();
    if (margin < verdict.margin) {
      verdict.margin = margin;
      verdict.worstTime = t;
    }
  }
  verdict.isIOFTS = verdict.margin > 0.0;
  return verdict;
}

double findQmax(const LtvSystem& sys, const TimeGrid& omega, const MatrixFunction& R,
                const MatrixFunction& Qshape, IntegrationMethod method, double relTol) {
  IOFTSSpec spec{SignalClass::W2, R, Qshape, omega};
  const GramianTrajectory traj = solveDLE(sys, spec, omega, method);

  double peak = 0.0;
  for (int k = 0; k < omega.nodeCount(); ++k) {
    const double t = omega.node(k);
    const Eigen::MatrixXd Ct = sys.C.eval(t);
    const Eigen::MatrixXd Qh = sqrtSpd(Qshape.eval(t));
    const Eigen::MatrixXd S = Qh * Ct * traj.W[static_cast<size_t>(k)] * Ct.transpose() * Qh;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()),
                                                      Eigen::EigenvaluesOnly);
    peak = std::max(peak, es.eigenvalues().maxCoeff());
  }
  if (peak <= 0.0) return std::numeric_limits<double>::infinity();
  const double direct = 1.0 / peak;

  // The condition scales linearly in q; bisection confirms the direct value.
  double lo = 0.0, hi = 2.0 * direct;
  for (int iter = 0; iter < 60 && (hi - lo) > relTol * direct; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mid * peak < 1.0 ? lo : hi) = mid;
  }
  if (std::abs(lo - direct) > 2.0 * relTol * direct)
    throw Error("q_max bisection disagrees with the direct value");
  return direct;
}

InputSignal worstCaseInput(const GramianTrajectory& traj, const LtvSystem& sys,
                           const IOFTSSpec& spec, double tStar) {
  if (spec.signalClass != SignalClass::W2)
    throw ParameterError("worst-case construction applies to W2 disturbances");
  const TimeGrid& grid = traj.grid;
  const int kStar = grid.indexOf(tStar, 1e-9 * std::max(1.0, grid.horizon()));
  if (kStar < 0) throw ParameterError("tStar must be a grid node");

  const double t = grid.node(kStar);
  const Eigen::MatrixXd Ct = sys.C.eval(t);
  const Eigen::MatrixXd Qh = sqrtSpd(spec.Q.eval(t));
  const Eigen::MatrixXd S = Qh * Ct * traj.W[static_cast<size_t>(kStar)] * Ct.transpose() * Qh;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (S + S.transpose()));
  const int top = static_cast<int>(es.eigenvalues().size()) - 1;
  const double lambda = es.eigenvalues()(top);
  if (lambda <= 1e-14 * std::max(1.0, S.cwiseAbs().maxCoeff()) || lambda <= 0.0)
    throw DegenerateDirectionError("no reachable output direction at tStar");
  const Eigen::VectorXd v = es.eigenvectors().col(top);

  // Backward adjoint p(tau) = Phi'(tStar, tau) C'(tStar) Q^1/2(tStar) v,
  // dp/dtau = -A'(tau) p.
  const int n = sys.stateDim();
  std::vector<Eigen::VectorXd> p(static_cast<size_t>(grid.nodeCount()),
                                 Eigen::VectorXd::Zero(n));
  p[static_cast<size_t>(kStar)] = Ct.transpose() * Qh * v;
  const double h = grid.step();
  auto rhs = [&sys](double tau, const Eigen::VectorXd& q) -> Eigen::VectorXd {
    return -sys.A.eval(tau).transpose() * q;
  };
  for (int k = kStar; k > 0; --k) {
    const double tk = grid.node(k);
    const Eigen::VectorXd& pk = p[static_cast<size_t>(k)];
    const Eigen::VectorXd k1 = rhs(tk, pk);
    const Eigen::VectorXd k2 = rhs(tk - 0.5 * h, pk - 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(tk - 0.5 * h, pk - 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(tk - h, pk - h * k3);
    p[static_cast<size_t>(k) - 1] = pk - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  InputSignal w;
  w.times = grid.nodes();
  w.values.reserve(w.times.size());
  for (int k = 0; k < grid.nodeCount(); ++k) {
    if (k > kStar) {
      w.values.push_back(Eigen::VectorXd::Zero(sys.inputDim()));
      continue;
    }
    const double tk = grid.node(k);
    w.values.push_back(inverseSpd(spec.R, tk) * sys.G.eval(tk).transpose() *
                       p[static_cast<size_t>(k)]);
  }
  const double energy = w.energy(spec.R);
  if (energy <= 0.0) throw DegenerateDirectionError("worst-case input has zero energy");
  const double scale = 1.0 / std::sqrt(energy);
  for (auto& val : w.values) val *= scale;
  return w;
}

}  // namespace iofts
