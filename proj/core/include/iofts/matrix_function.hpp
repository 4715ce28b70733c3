#pragma once

#include <Eigen/Core>
#include <vector>

namespace iofts {

/// Time-varying real matrix on a finite window.
///
/// Two representations:
///  (a) per-entry polynomials in t, coefficients stored constant-first —
///      evaluation is exact;
///  (b) samples on an increasing time set with linear interpolation —
///      queries clamp to the sampled range (beyond a small tolerance they
///      raise RangeError).
///
/// An optional breakpoint list marks piecewise continuity; builders consult
/// it to decide whether the strengthened output-bound variant applies.
class MatrixFunction {
 public:
  using PolyEntry = std::vector<double>;  // constant-first coefficients

  MatrixFunction() = default;

  static MatrixFunction polynomial(std::vector<std::vector<PolyEntry>> entries);
  static MatrixFunction constant(const Eigen::MatrixXd& value);
  static MatrixFunction zero(int rows, int cols);
  static MatrixFunction identity(int n);
  static MatrixFunction sampled(std::vector<double> times,
                                std::vector<Eigen::MatrixXd> values);

  bool empty() const { return rows_ == 0 || cols_ == 0; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool isPolynomial() const { return kind_ == Kind::Polynomial; }
  bool isSampled() const { return kind_ == Kind::Sampled; }

  /// Highest polynomial degree over all entries; sampled data counts as
  /// degree 1 (piecewise linear).
  int degree() const;

  Eigen::MatrixXd eval(double t) const;
  Eigen::MatrixXd operator()(double t) const { return eval(t); }

  /// Entry coefficients (polynomial representation only).
  const std::vector<std::vector<PolyEntry>>& entries() const;
  const std::vector<double>& sampleTimes() const;
  const std::vector<Eigen::MatrixXd>& sampleValues() const;

  MatrixFunction scaled(double factor) const;

  void setBreakpoints(std::vector<double> bps) { breakpoints_ = std::move(bps); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  bool hasBreakpoints() const { return !breakpoints_.empty(); }

  /// Max |entry| of eval over the sampled nodes of [t0, t1] (degree+2 probes
  /// for polynomials). Used for scale-aware tolerances.
  double boundOn(double t0, double t1) const;

 private:
  enum class Kind { Polynomial, Sampled };

  Kind kind_ = Kind::Polynomial;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::vector<PolyEntry>> entries_;  // polynomial rep
  std::vector<double> times_;                    // sampled rep
  std::vector<Eigen::MatrixXd> values_;
  std::vector<double> breakpoints_;
};

}  // namespace iofts
