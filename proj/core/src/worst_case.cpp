#include "iofts/worst_case.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "iofts/errors.hpp"
#include "iofts/gramian.hpp"
#include "iofts/parallel.hpp"

namespace iofts {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kAdmissibilitySlack = 1e-9;

std::vector<double> simulationNodes(const IOFTSSpec& spec) {
  // At least ~1000 steps across the window for trustworthy peaks.
  TimeGrid grid = spec.omega;
  if (grid.subintervals() < 1000) grid = grid.refined((1000 + grid.subintervals() - 1) / grid.subintervals());
  return grid.nodes();
}

MatrixXd inverseSqrtSpd(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (M + M.transpose()));
  return es.operatorInverseSqrt();
}

/// Scale an energy-class candidate to the unit ball (trapezoid quadrature).
void normalizeEnergy(InputSignal& w, const MatrixFunction& R) {
  const double energy = w.energy(R);
  if (energy <= 0.0) return;
  const double scale = 1.0 / std::sqrt(energy * (1.0 + kAdmissibilitySlack));
  for (auto& v : w.values) v *= scale;
}

/// Piecewise bang-bang candidate: on each span, w = sign * R^-1/2 column.
InputSignal bangBangCandidate(const MatrixFunction& R, const std::vector<double>& nodes,
                              const std::vector<double>& switchTimes,
                              const std::vector<std::pair<int, double>>& pattern) {
  InputSignal w;
  w.times = nodes;
  w.values.reserve(nodes.size());
  const int r = R.rows();
  for (double t : nodes) {
    size_t span = 0;
    while (span < switchTimes.size() && t >= switchTimes[span]) ++span;
    const auto& [column, sign] = pattern[span % pattern.size()];
    VectorXd e = VectorXd::Zero(r);
    e(column % r) = sign;
    w.values.push_back(inverseSqrtSpd(R.eval(t)) * e /
                       std::sqrt(1.0 + kAdmissibilitySlack));
  }
  return w;
}

struct LtvCandidateSet {
  std::vector<InputSignal> inputs;
};

LtvCandidateSet energyCandidates(const LtvSystem& sys, const IOFTSSpec& spec, int budget,
                                 std::mt19937_64& rng, const std::vector<double>& nodes) {
  LtvCandidateSet set;
  // The Gramian construction realizes the exact per-time optimum; aim it at
  // the most critical nodes.
  const GramianTrajectory traj = solveDLE(sys, spec, spec.omega, IntegrationMethod::Rk4);
  std::vector<std::pair<double, double>> lambdaByTime;  // (lambda, t)
  for (int k = 0; k < spec.omega.nodeCount(); ++k) {
    const double t = spec.omega.node(k);
    const MatrixXd Ct = sys.C.eval(t);
    Eigen::SelfAdjointEigenSolver<MatrixXd> qes(spec.Q.eval(t));
    const MatrixXd Qh = qes.operatorSqrt();
    const MatrixXd S = Qh * Ct * traj.W[static_cast<size_t>(k)] * Ct.transpose() * Qh;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()),
                                               Eigen::EigenvaluesOnly);
    lambdaByTime.emplace_back(es.eigenvalues().maxCoeff(), t);
  }
  std::sort(lambdaByTime.rbegin(), lambdaByTime.rend());
  const int gramianCount = std::min<int>(budget, std::min<int>(16, lambdaByTime.size()));
  for (int i = 0; i < gramianCount; ++i) {
    const double tStar = lambdaByTime[static_cast<size_t>(i)].second;
    if (lambdaByTime[static_cast<size_t>(i)].first <= 1e-14) break;
    try {
      InputSignal w = worstCaseInput(traj, sys, spec, tStar);
      // Re-sample onto the (finer) simulation node set.
      InputSignal fine;
      fine.times = nodes;
      for (double t : nodes) fine.values.push_back(w.at(t));
      normalizeEnergy(fine, spec.R);
      set.inputs.push_back(std::move(fine));
    } catch (const DegenerateDirectionError&) {
      break;
    }
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  while (static_cast<int>(set.inputs.size()) < budget) {
    InputSignal w;
    w.times = nodes;
    for (size_t k = 0; k < nodes.size(); ++k) {
      VectorXd v(sys.inputDim());
      for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
      w.values.push_back(v);
    }
    normalizeEnergy(w, spec.R);
    set.inputs.push_back(std::move(w));
  }
  return set;
}

LtvCandidateSet amplitudeCandidates(const MatrixFunction& R, int r, int budget,
                                    std::mt19937_64& rng, const std::vector<double>& nodes,
                                    double t0, double tEnd) {
  LtvCandidateSet set;
  // Deterministic constant sign patterns first.
  for (int col = 0; col < r && static_cast<int>(set.inputs.size()) < budget; ++col)
    for (double sign : {1.0, -1.0}) {
      if (static_cast<int>(set.inputs.size()) >= budget) break;
      set.inputs.push_back(bangBangCandidate(R, nodes, {}, {{col, sign}}));
    }
  std::uniform_real_distribution<double> uTime(t0, tEnd);
  std::uniform_int_distribution<int> uCol(0, r - 1);
  std::uniform_int_distribution<int> uFlips(0, 3);
  while (static_cast<int>(set.inputs.size()) < budget) {
    const int flips = uFlips(rng);
    std::vector<double> switches;
    for (int i = 0; i < flips; ++i) switches.push_back(uTime(rng));
    std::sort(switches.begin(), switches.end());
    std::vector<std::pair<int, double>> pattern;
    for (int i = 0; i <= flips; ++i)
      pattern.emplace_back(uCol(rng), rng() % 2 == 0 ? 1.0 : -1.0);
    set.inputs.push_back(bangBangCandidate(R, nodes, switches, pattern));
  }
  return set;
}

void reduceBest(WorstCaseResult& best, const Trajectory& traj, const InputSignal& w,
                const std::vector<double>& realization) {
  if (traj.peakWeighted > best.peak ||
      (traj.peakWeighted == best.peak && traj.peakTime < best.peakTime)) {
    best.peak = traj.peakWeighted;
    best.peakTime = traj.peakTime;
    best.trajectory = traj;
    best.input = w;
    best.resetRealization = realization;
  }
}

}  // namespace

WorstCaseResult searchWorstCase(const LtvSystem& sys, const IOFTSSpec& spec, int budget,
                                unsigned seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> nodes = simulationNodes(spec);
  WorstCaseResult best;
  if (budget <= 0) return best;

  LtvCandidateSet set =
      spec.signalClass == SignalClass::W2
          ? energyCandidates(sys, spec, budget, rng, nodes)
          : amplitudeCandidates(spec.R, sys.inputDim(), std::max(1, 2 * budget / 3), rng,
                                nodes, spec.omega.t0(), spec.omega.end());

  std::vector<Trajectory> results(set.inputs.size());
  parallelFor(set.inputs.size(), [&](size_t i) {
    results[i] = integrateLTV(sys, spec, set.inputs[i], nodes);
  });
  for (size_t i = 0; i < set.inputs.size(); ++i)
    reduceBest(best, results[i], set.inputs[i], {});
  best.evaluations = static_cast<int>(set.inputs.size());

  // Amplitude class: refine the best candidate's switch instants.
  if (spec.signalClass == SignalClass::Winf && best.evaluations < budget) {
    std::uniform_real_distribution<double> uTime(spec.omega.t0(), spec.omega.end());
    double stepSize = 0.1 * spec.omega.horizon();
    std::vector<double> switches{best.peakTime * 0.5};
    std::vector<std::pair<int, double>> pattern{{0, 1.0}, {0, -1.0}};
    while (best.evaluations < budget && stepSize > 1e-4 * spec.omega.horizon()) {
      bool improved = false;
      for (double delta : {stepSize, -stepSize}) {
        if (best.evaluations >= budget) break;
        std::vector<double> trial = switches;
        trial[0] = std::clamp(trial[0] + delta, spec.omega.t0(), spec.omega.end());
        const InputSignal w = bangBangCandidate(spec.R, nodes, trial, pattern);
        const Trajectory traj = integrateLTV(sys, spec, w, nodes);
        ++best.evaluations;
        if (traj.peakWeighted > best.peak) {
          reduceBest(best, traj, w, {});
          switches = trial;
          improved = true;
        }
      }
      if (!improved) stepSize *= 0.5;
    }
  }
  return best;
}

namespace {

/// Jump-aware Gramian worst input for one realization (energy class): the
/// reach Gramian propagates as W <- J W J' across each reset, and the
/// backward adjoint picks up J' at each crossing.
InputSignal switchedEnergyWorstInput(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                                     const std::vector<double>& realization,
                                     const std::vector<double>& nodes) {
  const std::vector<int> modes = modeSequence(ssys, spec.omega);
  auto modeAtNode = [&](double t) -> const LtvSystem& {
    size_t seg = 0;
    while (seg < realization.size() && t >= realization[seg] - 1e-15) ++seg;
    return ssys.family[static_cast<size_t>(modes[seg] - 1)];
  };

  // Forward Gramian with jumps (Euler on the fine node set).
  std::vector<MatrixXd> W(nodes.size());
  {
    int n0 = ssys.family[static_cast<size_t>(modes[0] - 1)].stateDim();
    MatrixXd W0 = MatrixXd::Zero(n0, n0);
    W[0] = W0;
    size_t nextReset = 0;
    for (size_t k = 0; k + 1 < nodes.size(); ++k) {
      const double t = nodes[k];
      const double h = nodes[k + 1] - t;
      const LtvSystem& sysk = modeAtNode(t);
      const MatrixXd At = sysk.A.eval(t);
      const MatrixXd Gt = sysk.G.eval(t);
      const MatrixXd Rinv = spec.R.eval(t).ldlt().solve(
          MatrixXd::Identity(spec.R.rows(), spec.R.cols()));
      W0 += h * (At * W0 + W0 * At.transpose() + Gt * Rinv * Gt.transpose());
      W0 = 0.5 * (W0 + W0.transpose());
      if (nextReset < realization.size() &&
          std::abs(nodes[k + 1] - realization[nextReset]) <= 1e-12) {
        const MatrixXd Jt = ssys.J.eval(nodes[k + 1]);
        W0 = Jt * W0 * Jt.transpose();
        ++nextReset;
      }
      W[k + 1] = W0;
    }
  }

  // Pick the most critical node.
  double bestLambda = 0.0;
  size_t kStar = 0;
  VectorXd vStar;
  for (size_t k = 0; k < nodes.size(); ++k) {
    const double t = nodes[k];
    const LtvSystem& sysk = modeAtNode(t);
    Eigen::SelfAdjointEigenSolver<MatrixXd> qes(spec.Q.eval(t));
    const MatrixXd Qh = qes.operatorSqrt();
    const MatrixXd S = Qh * sysk.C.eval(t) * W[k] * sysk.C.eval(t).transpose() * Qh;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()));
    const int top = static_cast<int>(es.eigenvalues().size()) - 1;
    if (es.eigenvalues()(top) > bestLambda) {
      bestLambda = es.eigenvalues()(top);
      kStar = k;
      vStar = es.eigenvectors().col(top);
    }
  }
  if (bestLambda <= 0.0)
    throw DegenerateDirectionError("switched system has no reachable output");

  // Backward adjoint with J' pickups.
  const double tStar = nodes[kStar];
  const LtvSystem& sysStar = modeAtNode(tStar);
  Eigen::SelfAdjointEigenSolver<MatrixXd> qes(spec.Q.eval(tStar));
  VectorXd p = sysStar.C.eval(tStar).transpose() * qes.operatorSqrt() * vStar;

  InputSignal w;
  w.times = nodes;
  w.values.assign(nodes.size(), VectorXd::Zero(spec.R.rows()));
  auto isRealizedReset = [&](double t) {
    for (double tr : realization)
      if (std::abs(tr - t) <= 1e-12 && tr <= tStar + 1e-12) return true;
    return false;
  };
  for (size_t k = kStar + 1; k-- > 0;) {
    const double t = nodes[k];
    // p currently holds the right-limit value p(t+), which drives the
    // zero-order-hold input on [t, t_next).
    const LtvSystem& sysHold = modeAtNode(t);
    const MatrixXd Rinv =
        spec.R.eval(t).ldlt().solve(MatrixXd::Identity(spec.R.rows(), spec.R.cols()));
    w.values[k] = Rinv * sysHold.G.eval(t).transpose() * p;
    if (k == 0) break;
    // Crossing the reset backwards picks up J'.
    if (isRealizedReset(t)) p = (ssys.J.eval(t).transpose() * p).eval();
    const double h = t - nodes[k - 1];
    const LtvSystem& sysSegment = modeAtNode(nodes[k - 1]);
    p += h * sysSegment.A.eval(t).transpose() * p;  // backward Euler step of -A'p
  }
  normalizeEnergy(w, spec.R);
  return w;
}

std::vector<std::vector<double>> realizationCandidates(const SwitchedSystem& ssys,
                                                       int maxCount, std::mt19937_64& rng) {
  const size_t h = ssys.resettingTimes.size();
  std::vector<std::vector<double>> out;
  out.push_back(ssys.resettingTimes);  // nominal
  if (!ssys.hasUncertainTimes() || h == 0) return out;

  // Corner grid {lo, nominal, hi}^h, capped.
  std::vector<size_t> idx(h, 0);
  while (out.size() < static_cast<size_t>(maxCount)) {
    std::vector<double> real(h);
    for (size_t j = 0; j < h; ++j) {
      const double d = ssys.deltaTAt(static_cast<int>(j));
      real[j] = ssys.resettingTimes[j] + (idx[j] == 0 ? -d : (idx[j] == 1 ? 0.0 : d));
    }
    if (real != ssys.resettingTimes) out.push_back(real);
    size_t j = 0;
    while (j < h && ++idx[j] == 3) idx[j++] = 0;
    if (j == h) break;
  }
  // Random interior draws.
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (out.size() < static_cast<size_t>(maxCount)) {
    std::vector<double> real(h);
    for (size_t j = 0; j < h; ++j)
      real[j] = ssys.resettingTimes[j] + u(rng) * ssys.deltaTAt(static_cast<int>(j));
    out.push_back(real);
  }
  return out;
}

}  // namespace

WorstCaseResult searchWorstCase(const SwitchedSystem& ssys, const IOFTSSpec& spec, int budget,
                                unsigned seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> baseNodes = simulationNodes(spec);
  WorstCaseResult best;
  if (budget <= 0) return best;

  const int realizationCount =
      ssys.hasUncertainTimes() ? std::max(1, std::min(budget / 2, 200)) : 1;
  const auto realizations = realizationCandidates(ssys, realizationCount, rng);
  const int perRealization = std::max(1, budget / static_cast<int>(realizations.size()));

  struct Candidate {
    std::vector<double> realization;
    InputSignal input;
  };
  std::vector<Candidate> candidates;

  for (const auto& realization : realizations) {
    const std::vector<double> nodes = insertNodes(baseNodes, realization);
    if (spec.signalClass == SignalClass::W2) {
      int added = 0;
      try {
        candidates.push_back({realization,
                              switchedEnergyWorstInput(ssys, spec, realization, nodes)});
        ++added;
      } catch (const DegenerateDirectionError&) {
      }
      std::normal_distribution<double> gauss(0.0, 1.0);
      while (added < perRealization) {
        InputSignal w;
        w.times = nodes;
        for (size_t k = 0; k < nodes.size(); ++k)
          w.values.push_back(VectorXd::NullaryExpr(spec.R.rows(),
                                                   [&](Eigen::Index) { return gauss(rng); }));
        normalizeEnergy(w, spec.R);
        candidates.push_back({realization, std::move(w)});
        ++added;
      }
    } else {
      const int r = spec.R.rows();
      int added = 0;
      for (int col = 0; col < r && added < perRealization; ++col)
        for (double sign : {1.0, -1.0}) {
          if (added >= perRealization) break;
          candidates.push_back(
              {realization, bangBangCandidate(spec.R, nodes, {}, {{col, sign}})});
          ++added;
        }
      std::uniform_real_distribution<double> uTime(spec.omega.t0(), spec.omega.end());
      std::uniform_int_distribution<int> uCol(0, r - 1);
      std::uniform_int_distribution<int> uFlips(0, 3);
      while (added < perRealization) {
        const int flips = uFlips(rng);
        std::vector<double> switches;
        for (int i = 0; i < flips; ++i) switches.push_back(uTime(rng));
        std::sort(switches.begin(), switches.end());
        std::vector<std::pair<int, double>> pattern;
        for (int i = 0; i <= flips; ++i)
          pattern.emplace_back(uCol(rng), rng() % 2 == 0 ? 1.0 : -1.0);
        candidates.push_back(
            {realization, bangBangCandidate(spec.R, nodes, switches, pattern)});
        ++added;
      }
    }
    if (static_cast<int>(candidates.size()) >= budget) break;
  }
  if (static_cast<int>(candidates.size()) > budget) candidates.resize(static_cast<size_t>(budget));

  std::vector<Trajectory> results(candidates.size());
  parallelFor(candidates.size(), [&](size_t i) {
    const std::vector<double> nodes = insertNodes(baseNodes, candidates[i].realization);
    results[i] = integrateSwitched(ssys, spec, candidates[i].realization, candidates[i].input,
                                   nodes);
  });
  for (size_t i = 0; i < candidates.size(); ++i)
    reduceBest(best, results[i], candidates[i].input, candidates[i].realization);
  best.evaluations = static_cast<int>(candidates.size());
  return best;
}

}  // namespace iofts
