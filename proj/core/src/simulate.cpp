#include "iofts/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "iofts/errors.hpp"

namespace iofts {

namespace {

Eigen::VectorXd plantRhs(const LtvSystem& sys, double t, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& w) {
  return sys.A.eval(t) * x + sys.G.eval(t) * w;
}

void checkFinite(const Eigen::VectorXd& x, double t) {
  if (!x.allFinite())
    throw DivergenceError("state integration diverged at t=" + std::to_string(t));
}

Eigen::VectorXd stepState(const LtvSystem& sys, double t, double h, const Eigen::VectorXd& x,
                          const Eigen::VectorXd& w, IntegrationMethod method) {
  if (method == IntegrationMethod::Euler) return x + h * plantRhs(sys, t, x, w);
  const Eigen::VectorXd k1 = plantRhs(sys, t, x, w);
  const Eigen::VectorXd k2 = plantRhs(sys, t + 0.5 * h, x + 0.5 * h * k1, w);
  const Eigen::VectorXd k3 = plantRhs(sys, t + 0.5 * h, x + 0.5 * h * k2, w);
  const Eigen::VectorXd k4 = plantRhs(sys, t + h, x + h * k3, w);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void record(Trajectory& traj, const LtvSystem& active, const IOFTSSpec& spec, double t,
            const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  Eigen::VectorXd y = active.C.eval(t) * x;
  if (active.D) y += active.D->eval(t) * w;
  const double weighted = y.dot(spec.Q.eval(t) * y);
  traj.times.push_back(t);
  traj.x.push_back(x);
  traj.y.push_back(y);
  traj.weighted.push_back(weighted);
  if (weighted > traj.peakWeighted) {
    traj.peakWeighted = weighted;
    traj.peakTime = t;
  }
}

}  // namespace

InputSignal InputSignal::zero(int dim, const std::vector<double>& nodes) {
  InputSignal w;
  w.times = nodes;
  w.values.assign(nodes.size(), Eigen::VectorXd::Zero(dim));
  return w;
}

InputSignal InputSignal::constant(const Eigen::VectorXd& value, const std::vector<double>& nodes) {
  InputSignal w;
  w.times = nodes;
  w.values.assign(nodes.size(), value);
  return w;
}

Eigen::VectorXd InputSignal::at(double t) const {
  if (times.empty()) throw StructuralError("InputSignal: empty");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return values.front();
  const size_t k = static_cast<size_t>(it - times.begin()) - 1;
  return values[std::min(k, values.size() - 1)];
}

double InputSignal::energy(const MatrixFunction& R) const {
  double total = 0.0;
  for (size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    const double f0 = values[k].dot(R.eval(times[k]) * values[k]);
    const double f1 = values[k + 1].dot(R.eval(times[k + 1]) * values[k + 1]);
    total += 0.5 * h * (f0 + f1);
  }
  return total;
}

double InputSignal::peakAmplitude(const MatrixFunction& R) const {
  double peak = 0.0;
  for (size_t k = 0; k < times.size(); ++k)
    peak = std::max(peak, values[k].dot(R.eval(times[k]) * values[k]));
  return peak;
}

std::vector<double> gridNodes(const TimeGrid& grid) { return grid.nodes(); }

std::vector<double> insertNodes(std::vector<double> nodes, const std::vector<double>& extra,
                                double tol) {
  nodes.insert(nodes.end(), extra.begin(), extra.end());
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> out;
  for (double t : nodes) {
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  }
  return out;
}

Trajectory integrateLTV(const LtvSystem& sys, const IOFTSSpec& spec, const InputSignal& w,
                        const std::vector<double>& nodes, IntegrationMethod method) {
  Trajectory traj;
  if (nodes.size() < 2) throw StructuralError("integrateLTV: need at least two nodes");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.stateDim());
  record(traj, sys, spec, nodes[0], x, w.at(nodes[0]));
  for (size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double t = nodes[k];
    const double h = nodes[k + 1] - t;
    const Eigen::VectorXd wk = w.at(t);  // zero-order hold
    x = stepState(sys, t, h, x, wk, method);
    checkFinite(x, nodes[k + 1]);
    record(traj, sys, spec, nodes[k + 1], x, w.at(nodes[k + 1]));
  }
  return traj;
}

Trajectory integrateLTV(const LtvSystem& sys, const IOFTSSpec& spec, const InputSignal& w,
                        const TimeGrid& grid, IntegrationMethod method) {
  return integrateLTV(sys, spec, w, grid.nodes(), method);
}

std::vector<int> modeSequence(const SwitchedSystem& ssys, const TimeGrid& omega) {
  std::vector<double> probes;
  const auto& resets = ssys.resettingTimes;
  if (resets.empty()) {
    probes.push_back(0.5 * (omega.t0() + omega.end()));
  } else {
    probes.push_back(0.5 * (omega.t0() + resets.front()));
    for (size_t k = 0; k + 1 < resets.size(); ++k)
      probes.push_back(0.5 * (resets[k] + resets[k + 1]));
    probes.push_back(0.5 * (resets.back() + omega.end()));
  }
  std::vector<int> modes;
  modes.reserve(probes.size());
  for (double t : probes) modes.push_back(ssys.modeAt(t));
  return modes;
}

Trajectory integrateSwitched(const SwitchedSystem& ssys, const IOFTSSpec& spec,
                             const std::vector<double>& resetRealization, const InputSignal& w,
                             const std::vector<double>& nodes, IntegrationMethod method) {
  if (resetRealization.size() != ssys.resettingTimes.size())
    throw RealizationError("realization must provide one instant per nominal reset");
  for (size_t k = 0; k < resetRealization.size(); ++k) {
    const double nominal = ssys.resettingTimes[k];
    const double half = ssys.deltaTAt(static_cast<int>(k));
    if (std::abs(resetRealization[k] - nominal) > half + 1e-12)
      throw RealizationError("realized reset " + std::to_string(resetRealization[k]) +
                             " outside its window around " + std::to_string(nominal));
  }
  if (!std::is_sorted(resetRealization.begin(), resetRealization.end()))
    throw RealizationError("realized resets must keep their order");

  const std::vector<double> allNodes = insertNodes(nodes, resetRealization);
  const std::vector<int> modes = modeSequence(
      ssys, TimeGrid(allNodes.front(), allNodes.back() - allNodes.front(),
                     allNodes.back() - allNodes.front()));

  Trajectory traj;
  size_t segment = 0;
  const LtvSystem* active = &ssys.family[static_cast<size_t>(modes[segment] - 1)];
  Eigen::VectorXd x = Eigen::VectorXd::Zero(active->stateDim());
  record(traj, *active, spec, allNodes[0], x, w.at(allNodes[0]));

  size_t nextReset = 0;
  for (size_t k = 0; k + 1 < allNodes.size(); ++k) {
    const double t = allNodes[k];
    const double h = allNodes[k + 1] - t;
    x = stepState(*active, t, h, x, w.at(t), method);
    checkFinite(x, allNodes[k + 1]);
    const double tNext = allNodes[k + 1];
    record(traj, *active, spec, tNext, x, w.at(tNext));
    if (nextReset < resetRealization.size() &&
        std::abs(tNext - resetRealization[nextReset]) <= 1e-12) {
      x = ssys.J.eval(tNext) * x;  // state jump
      ++segment;
      ++nextReset;
      active = &ssys.family[static_cast<size_t>(modes[segment] - 1)];
      record(traj, *active, spec, tNext, x, w.at(tNext));
    }
  }
  return traj;
}

}  // namespace iofts
