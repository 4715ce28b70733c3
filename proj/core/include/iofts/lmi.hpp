#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace iofts {

/// One matrix unknown inside a VarLayout: a contiguous range of decision
/// scalars. Symmetric unknowns store the lower triangle column-major.
struct UnknownRef {
  int firstVar = -1;
  int rows = 0;
  int cols = 0;
  bool symmetric = false;

  int scalarCount() const { return symmetric ? rows * (rows + 1) / 2 : rows * cols; }
  int varIndex(int i, int j) const;

  Eigen::MatrixXd unpack(const Eigen::VectorXd& x) const;
  /// Adjoint scatter: g[vars] += <basis, Gmat> for each scalar.
  void scatterGradient(const Eigen::MatrixXd& Gmat, Eigen::VectorXd& g) const;
};

class VarLayout {
 public:
  UnknownRef addSymmetric(const std::string& name, int n);
  UnknownRef addFull(const std::string& name, int rows, int cols);
  int count() const { return count_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  int count_ = 0;
  std::vector<std::string> names_;
};

/// A term  left * U * right  (optionally U transposed) placed inside a
/// symmetric block. Diagonal placements (row0 == col0) are hermitized:
/// the term contributes M + M'. Off-diagonal placements contribute M at
/// (row0, col0) and M' mirrored, keeping the block symmetric.
struct LmiTerm {
  int row0 = 0;
  int col0 = 0;
  Eigen::MatrixXd left;
  Eigen::MatrixXd right;
  UnknownRef unk;
  bool transposeUnknown = false;
};

/// One symmetric affine constraint  F0 + sum_i x_i F_i  < -margin * I,
/// stored as a constant plus structured terms ("greater" constraints are
/// stored negated by the builders).
class LmiBlock {
 public:
  LmiBlock(int dim, std::string label);

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }

  /// Constant contribution at (row0, col0). Diagonal placements must pass a
  /// symmetric M; off-diagonal placements are mirrored automatically.
  void addConstant(int row0, int col0, const Eigen::MatrixXd& M);

  /// Unknown-dependent contribution left * U * right at (row0, col0); see
  /// LmiTerm for the hermitization/mirroring convention.
  void addTerm(int row0, int col0, const Eigen::MatrixXd& left, const UnknownRef& unk,
               const Eigen::MatrixXd& right, bool transposeUnknown = false);

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;

  /// g += (d/dx) <evaluate(x), Y> for symmetric Y (the affine part drops out).
  void accumulateAdjoint(const Eigen::MatrixXd& Y, Eigen::VectorXd& g) const;

  const Eigen::MatrixXd& constant() const { return constant_; }
  const std::vector<LmiTerm>& terms() const { return terms_; }

  /// Explicit coefficient matrices of each scalar variable appearing in the
  /// block, as (var, placement-position, dense sub-block) triplets folded to
  /// the upper triangle. Used for Gram assembly and the sparse dump.
  struct Placement {
    int row0, col0;
    Eigen::MatrixXd M;
  };
  std::vector<std::pair<int, std::vector<Placement>>> materializeCoefficients() const;

 private:
  int dim_;
  std::string label_;
  Eigen::MatrixXd constant_;
  std::vector<LmiTerm> terms_;
};

struct AffineLmiSystem {
  VarLayout layout;
  std::vector<LmiBlock> blocks;

  int numVars() const { return layout.count(); }
  /// Throws StructuralError on inconsistent dimensions or unused variables.
  void validateStructure() const;
};

enum class FeasibilityStatus { Feasible, InfeasibleAtTolerance, IterationLimit };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::IterationLimit;
  Eigen::VectorXd x;
  double achievedMargin = 0.0;
  double distance = 0.0;  // final distance between the affine and cone iterates
  int iterations = 0;
  std::vector<double> distanceTrace;  // filled when requested
};

enum class ProjectionAlgorithm {
  /// Douglas-Rachford reflections between the two sets; same projection
  /// oracles as the plain method but far faster on thin intersections.
  Reflections,
  /// Plain alternating projections (the reference algorithm; its iterate
  /// distance is monotone).
  AlternatingProjections,
};

struct SolveOptions {
  double margin = 1e-6;
  double tol = 1e-8;
  int maxIter = 20000;
  int stagnationWindow = 100;
  double stagnationRelImprovement = 1e-4;
  ProjectionAlgorithm algorithm = ProjectionAlgorithm::Reflections;
  Eigen::VectorXd warmStart;
  bool recordDistanceTrace = false;
  /// Optional replacement solver behind the same contract; results are
  /// still audited through verifyCertificate.
  std::function<FeasibilityResult(const AffineLmiSystem&)> adapter;
};

/// Projection splitting between the affine set of block values reachable
/// by some x (least-squares projection through a prefactored Gram system)
/// and the product of shifted negative-semidefinite cones (eigenvalue
/// clipping): Douglas-Rachford reflections by default, plain alternating
/// projections as the reference variant. Certified-feasible results always
/// satisfy achievedMargin >= margin per verifyCertificate.
FeasibilityResult solveFeasibility(const AffineLmiSystem& sys, const SolveOptions& opts = {});

/// Exact per-block margins -lambda_max(F0 + sum x_i F_i); no solver state.
std::vector<double> verifyCertificate(const AffineLmiSystem& sys, const Eigen::VectorXd& x);

/// Text dump, one line per nonzero: `block var row col value` with var 0
/// holding the constant term and decision variables 1-based.
void writeSparseDump(const AffineLmiSystem& sys, std::ostream& out);

std::string feasibilityStatusName(FeasibilityStatus s);

}  // namespace iofts
