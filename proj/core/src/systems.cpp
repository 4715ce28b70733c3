#include "iofts/systems.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "iofts/errors.hpp"

namespace iofts {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double minEigenvalueSym(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void checkWeight(const IOFTSSpec& spec, const MatrixFunction& Wgt, const char* name,
                 int expectedDim, std::vector<Violation>& out) {
  if (Wgt.rows() != Wgt.cols()) {
    out.push_back({name, kNaN, std::string(name) + " must be square"});
    return;
  }
  if (expectedDim >= 0 && Wgt.rows() != expectedDim) {
    out.push_back({name, kNaN,
                   std::string(name) + " dimension " + std::to_string(Wgt.rows()) +
                       " does not match signal dimension " + std::to_string(expectedDim)});
    return;
  }
  for (int k = 0; k < spec.omega.nodeCount(); ++k) {
    const double t = spec.omega.node(k);
    const Eigen::MatrixXd M = Wgt.eval(t);
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
      out.push_back({name, t, std::string(name) + " not symmetric at t=" + std::to_string(t)});
      return;
    }
    if (minEigenvalueSym(M) <= kPdTol) {
      out.push_back({name, t,
                     std::string(name) + " not positive definite at t=" + std::to_string(t)});
      return;
    }
  }
}

void checkPlantDims(const LtvSystem& sys, const std::string& prefix,
                    std::vector<Violation>& out) {
  const int n = sys.A.rows();
  if (sys.A.rows() != sys.A.cols())
    out.push_back({prefix + "A", kNaN, "A must be square"});
  if (sys.G.rows() != n)
    out.push_back({prefix + "G", kNaN, "G row count must match state dimension"});
  if (sys.C.cols() != n)
    out.push_back({prefix + "C", kNaN, "C column count must match state dimension"});
  if (sys.B && sys.B->rows() != n)
    out.push_back({prefix + "B", kNaN, "B row count must match state dimension"});
  if (sys.D) {
    if (sys.D->rows() != sys.C.rows())
      out.push_back({prefix + "D", kNaN, "D row count must match output dimension"});
    if (sys.D->cols() != sys.G.cols())
      out.push_back({prefix + "D", kNaN, "D column count must match disturbance dimension"});
  }
}

}  // namespace

int SwitchedSystem::modeAt(double t) const {
  if (sigma.empty()) return 1;
  int mode = sigma.front().mode;
  for (const auto& seg : sigma) {
    if (t >= seg.from) mode = seg.mode;  // right-continuous
  }
  return mode;
}

bool SwitchedSystem::hasUncertainTimes() const {
  for (double d : deltaT)
    if (d > 0.0) return true;
  return false;
}

std::vector<Violation> validate(const IOFTSSpec& spec, const LtvSystem& sys) {
  std::vector<Violation> out;
  checkPlantDims(sys, "", out);
  checkWeight(spec, spec.R, "R", sys.G.cols(), out);
  checkWeight(spec, spec.Q, "Q", sys.C.rows(), out);
  return out;
}

std::vector<Violation> validate(const IOFTSSpec& spec, const SwitchedSystem& sys) {
  std::vector<Violation> out;
  if (sys.family.empty()) {
    out.push_back({"family", kNaN, "switching family is empty"});
    return out;
  }
  for (size_t p = 0; p < sys.family.size(); ++p)
    checkPlantDims(sys.family[p], "family[" + std::to_string(p + 1) + "].", out);

  checkWeight(spec, spec.R, "R", sys.family[0].G.cols(), out);
  checkWeight(spec, spec.Q, "Q", sys.family[0].C.rows(), out);

  const int l = sys.modeCount();
  for (size_t s = 0; s < sys.sigma.size(); ++s) {
    const auto& seg = sys.sigma[s];
    if (seg.mode < 1 || seg.mode > l)
      out.push_back({"sigma", seg.from,
                     "mode " + std::to_string(seg.mode) + " outside 1.." + std::to_string(l)});
    if (s > 0 && seg.from <= sys.sigma[s - 1].from)
      out.push_back({"sigma", seg.from, "segment start times must be strictly increasing"});
  }

  const double t0 = spec.omega.t0();
  const double tEnd = spec.omega.end();
  if (!sys.deltaT.empty() && sys.deltaT.size() != sys.resettingTimes.size())
    out.push_back({"deltaT", kNaN, "deltaT length must match resetting time count"});

  for (size_t k = 0; k < sys.resettingTimes.size(); ++k) {
    const double tk = sys.resettingTimes[k];
    const double dk = sys.deltaTAt(static_cast<int>(k));
    if (dk < 0.0) out.push_back({"deltaT", tk, "reset window half-width must be >= 0"});
    if (k == 0 && tk - dk <= t0)
      out.push_back({"resettingTimes", tk, "first reset window must start strictly after t0"});
    if (k > 0 && tk <= sys.resettingTimes[k - 1])
      out.push_back({"resettingTimes", tk, "resetting times must be strictly increasing"});
    if (tk + dk >= tEnd)
      out.push_back({"resettingTimes", tk, "reset window must end strictly before t0 + T"});
    if (k > 0) {
      const double prevHi = sys.resettingTimes[k - 1] + sys.deltaTAt(static_cast<int>(k) - 1);
      if (tk - dk <= prevHi)
        out.push_back({"deltaT", tk,
                       "reset windows [t_k - dT_k, t_k + dT_k] must be pairwise disjoint"});
    }
  }

  // Jump map shape against the modes on either side of each reset.
  for (double tk : sys.resettingTimes) {
    const int before = sys.modeAt(std::nextafter(tk, -std::numeric_limits<double>::infinity()));
    const int after = sys.modeAt(tk);
    if (before >= 1 && before <= l && after >= 1 && after <= l) {
      const int nBefore = sys.family[static_cast<size_t>(before - 1)].stateDim();
      const int nAfter = sys.family[static_cast<size_t>(after - 1)].stateDim();
      if (sys.J.cols() != nBefore || sys.J.rows() != nAfter) {
        out.push_back({"J", tk,
                       "jump map must be " + std::to_string(nAfter) + "x" +
                           std::to_string(nBefore) + " at this reset"});
        break;
      }
    }
  }
  return out;
}

std::string signalClassName(SignalClass c) { return c == SignalClass::W2 ? "W2" : "Winf"; }

SignalClass signalClassFromString(const std::string& s) {
  if (s == "W2" || s == "w2") return SignalClass::W2;
  if (s == "Winf" || s == "winf" || s == "Woo") return SignalClass::Winf;
  throw StructuralError("unknown signal class: " + s);
}

}  // namespace iofts
