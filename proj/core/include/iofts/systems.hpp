#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iofts/matrix_function.hpp"
#include "iofts/time_grid.hpp"

namespace iofts {

/// Linear time-varying plant
///   xdot = A x + B u + G w,   x(t0) = 0
///   y    = C x + D w
/// B is absent for analysis-only plants; D absent means strictly proper.
struct LtvSystem {
  MatrixFunction A;                 // n x n
  std::optional<MatrixFunction> B;  // n x m_u
  MatrixFunction G;                 // n x r
  MatrixFunction C;                 // m x n
  std::optional<MatrixFunction> D;  // m x r

  int stateDim() const { return A.rows(); }
  int inputDim() const { return G.cols(); }
  int outputDim() const { return C.rows(); }
  int controlDim() const { return B ? B->cols() : 0; }
  bool strictlyProper() const { return !D.has_value(); }
};

/// Plant in feedback with a norm-bounded uncertainty block:
///   xdot   = A x + F1 wd + G w
///   zd     = E1 x + H wd + E2 w
///   y      = C x + F2 wd + D w
///   wd     = Delta(t) zd,   ||Delta(t)|| <= 1 on the window.
/// The disturbance channel is the base plant's G (and D when present).
struct UncertainLtvSystem {
  LtvSystem base;
  MatrixFunction F1;  // n x q
  MatrixFunction F2;  // m x q
  MatrixFunction E1;  // p x n
  MatrixFunction E2;  // p x r
  MatrixFunction H;   // p x q

  int uncertaintyInDim() const { return F1.cols(); }   // q
  int uncertaintyOutDim() const { return E1.rows(); }  // p
};

/// One piece of a right-continuous piecewise-constant switching signal:
/// mode `mode` is active from `from` until the next segment starts.
struct SigmaSegment {
  double from = 0.0;
  int mode = 1;  // 1-based index into the family
};

/// Time-dependent switching linear system: a family of (A_p, G_p, C_p)
/// triples, a switching signal, resetting times with state jumps
/// x(t+) = J(t) x(t), and optional half-width windows around each reset.
struct SwitchedSystem {
  std::vector<LtvSystem> family;     // B, D unused
  std::vector<SigmaSegment> sigma;   // ordered by `from`
  std::vector<double> resettingTimes;
  MatrixFunction J;
  std::vector<double> deltaT;        // one half-width per reset; empty = all zero

  int modeCount() const { return static_cast<int>(family.size()); }

  /// Active mode at time t (right-continuous lookup).
  int modeAt(double t) const;

  double deltaTAt(int resetIndex) const {
    return deltaT.empty() ? 0.0 : deltaT[static_cast<size_t>(resetIndex)];
  }
  bool hasUncertainTimes() const;
};

enum class SignalClass { W2, Winf };

/// The certification target: signal class, input weight R, output weight Q,
/// and the time window.
struct IOFTSSpec {
  SignalClass signalClass = SignalClass::W2;
  MatrixFunction R;  // r x r, positive definite on the window
  MatrixFunction Q;  // m x m, positive definite on the window
  TimeGrid omega{0.0, 1.0, 1.0};
};

struct Violation {
  std::string field;
  double time;  // NaN when not tied to a time instant
  std::string message;
};

std::vector<Violation> validate(const IOFTSSpec& spec, const LtvSystem& sys);
std::vector<Violation> validate(const IOFTSSpec& spec, const SwitchedSystem& sys);

/// Minimum-eigenvalue threshold for positive-definiteness checks.
inline constexpr double kPdTol = 1e-9;

std::string signalClassName(SignalClass c);
SignalClass signalClassFromString(const std::string& s);

}  // namespace iofts
