#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <sstream>

#include "iofts/errors.hpp"
#include "iofts/lmi.hpp"

using namespace iofts;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

AffineLmiSystem scalarSystem(double f0, double f1) {
  AffineLmiSystem sys;
  UnknownRef x = sys.layout.addFull("x", 1, 1);
  LmiBlock block(1, "scalar");
  block.addConstant(0, 0, MatrixXd::Constant(1, 1, f0));
  block.addTerm(0, 0, MatrixXd::Constant(1, 1, 0.5 * f1), x, MatrixXd::Identity(1, 1));
  sys.blocks.push_back(std::move(block));
  return sys;
}

/// Random instance with a known feasible point: one symmetric 2x2 unknown
/// and one full 1x2 unknown coupled through a 4x4 block, plus a constant
/// definite block. The constant is chosen so xStar achieves margin >= 1.
AffineLmiSystem randomFeasibleSystem(std::mt19937_64& rng, VectorXd* xStarOut = nullptr) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&](int r, int c) {
    MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = u(rng);
    return M;
  };

  AffineLmiSystem sys;
  UnknownRef P = sys.layout.addSymmetric("P", 2);
  UnknownRef K = sys.layout.addFull("K", 1, 2);

  LmiBlock block(4, "coupled");
  block.addTerm(0, 0, rnd(2, 2), P, MatrixXd::Identity(2, 2));
  block.addTerm(0, 2, rnd(2, 2), P, rnd(2, 2));
  block.addTerm(0, 2, rnd(2, 1), K, rnd(2, 2));
  block.addTerm(2, 2, rnd(2, 2), K, rnd(1, 2), /*transposeUnknown=*/true);

  VectorXd xStar(sys.layout.count());
  for (int i = 0; i < xStar.size(); ++i) xStar(i) = u(rng);

  // Shift the constant so that xStar lands strictly inside the cone.
  sys.blocks.push_back(block);
  const MatrixXd atStar = sys.blocks[0].evaluate(xStar);
  MatrixXd target = -2.0 * MatrixXd::Identity(4, 4);
  const MatrixXd shift = target - atStar;
  sys.blocks[0].addConstant(0, 0, 0.5 * (shift.topLeftCorner(2, 2) +
                                         shift.topLeftCorner(2, 2).transpose()));
  sys.blocks[0].addConstant(2, 2, 0.5 * (shift.bottomRightCorner(2, 2) +
                                         shift.bottomRightCorner(2, 2).transpose()));
  sys.blocks[0].addConstant(0, 2, shift.topRightCorner(2, 2));

  // Pure-constant definite block; its negation pins infeasibility.
  LmiBlock fixed(2, "constant");
  fixed.addConstant(0, 0, -1.5 * MatrixXd::Identity(2, 2));
  sys.blocks.push_back(std::move(fixed));

  if (xStarOut) *xStarOut = xStar;
  return sys;
}

AffineLmiSystem negated(const AffineLmiSystem& sys) {
  AffineLmiSystem out;
  out.layout = sys.layout;
  for (const auto& block : sys.blocks) {
    LmiBlock nb(block.dim(), block.label() + "-negated");
    nb.addConstant(0, 0, (-block.constant()).eval());
    for (const auto& term : block.terms())
      nb.addTerm(term.row0, term.col0, (-term.left).eval(), term.unk, term.right,
                 term.transposeUnknown);
    out.blocks.push_back(std::move(nb));
  }
  return out;
}

}  // namespace

TEST_CASE("scalar slack block is feasible") {
  auto sys = scalarSystem(-2.0, 1.0);
  SolveOptions opts;
  opts.margin = 0.5;
  auto result = solveFeasibility(sys, opts);
  CHECK(result.status == FeasibilityStatus::Feasible);
  CHECK(result.achievedMargin >= 0.5);
  // x = 0 would already achieve margin 2.
  const auto margins = verifyCertificate(sys, VectorXd::Zero(1));
  CHECK(margins[0] == doctest::Approx(2.0));
}

TEST_CASE("contradictory scalar constraints are infeasible") {
  // x <= -1 and x >= +1.
  AffineLmiSystem sys;
  UnknownRef x = sys.layout.addFull("x", 1, 1);
  LmiBlock lower(1, "x <= -1");
  lower.addConstant(0, 0, MatrixXd::Constant(1, 1, 1.0));
  lower.addTerm(0, 0, MatrixXd::Constant(1, 1, 0.5), x, MatrixXd::Identity(1, 1));
  LmiBlock upper(1, "x >= +1");
  upper.addConstant(0, 0, MatrixXd::Constant(1, 1, 1.0));
  upper.addTerm(0, 0, MatrixXd::Constant(1, 1, -0.5), x, MatrixXd::Identity(1, 1));
  sys.blocks.push_back(std::move(lower));
  sys.blocks.push_back(std::move(upper));

  auto result = solveFeasibility(sys);
  CHECK(result.status == FeasibilityStatus::InfeasibleAtTolerance);
  CHECK(result.distance > 0.1);
}

TEST_CASE("evaluate/adjoint are an exact linear pair") {
  std::mt19937_64 rng(991);
  for (int trial = 0; trial < 25; ++trial) {
    auto sys = randomFeasibleSystem(rng);
    const int nv = sys.numVars();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd x(nv);
    for (int i = 0; i < nv; ++i) x(i) = u(rng);

    for (const auto& block : sys.blocks) {
      MatrixXd Y(block.dim(), block.dim());
      for (int i = 0; i < block.dim(); ++i)
        for (int j = 0; j <= i; ++j) Y(i, j) = Y(j, i) = u(rng);

      const MatrixXd Lx = block.evaluate(x) - block.constant();
      VectorXd g = VectorXd::Zero(nv);
      block.accumulateAdjoint(Y, g);
      const double lhs = (Lx.array() * Y.array()).sum();
      const double rhs = g.dot(x);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }
}

TEST_CASE("random feasible instances solve and pass the audit") {
  std::mt19937_64 rng(20260809);
  int feasibleCount = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto sys = randomFeasibleSystem(rng);
    SolveOptions opts;
    opts.recordDistanceTrace = true;
    auto result = solveFeasibility(sys, opts);
    REQUIRE(result.status == FeasibilityStatus::Feasible);
    ++feasibleCount;

    // Solver-independent audit.
    const auto margins = verifyCertificate(sys, result.x);
    for (double m : margins) CHECK(m >= opts.margin - 1e-9);

    // Monotone distance between iterates.
    for (size_t k = 1; k < result.distanceTrace.size(); ++k)
      CHECK(result.distanceTrace[k] <=
            result.distanceTrace[k - 1] + 1e-9 * (1.0 + result.distanceTrace[k - 1]));
  }
  CHECK(feasibleCount == 100);
}

TEST_CASE("negating the data flips feasibility on strictly feasible instances") {
  std::mt19937_64 rng(555);
  for (int trial = 0; trial < 20; ++trial) {
    auto sys = randomFeasibleSystem(rng);
    auto neg = negated(sys);
    auto result = solveFeasibility(neg);
    CHECK(result.status != FeasibilityStatus::Feasible);
  }
}

TEST_CASE("eigenvector-directed perturbation breaks a certificate") {
  std::mt19937_64 rng(31337);
  auto sys = randomFeasibleSystem(rng);
  auto result = solveFeasibility(sys);
  REQUIRE(result.status == FeasibilityStatus::Feasible);

  const auto margins = verifyCertificate(sys, result.x);
  size_t worst = 0;
  for (size_t b = 1; b < margins.size(); ++b)
    if (margins[b] < margins[worst]) worst = b;

  const double mStar = margins[worst];
  const MatrixXd V = sys.blocks[worst].evaluate(result.x);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(V);
  const VectorXd u = es.eigenvectors().col(es.eigenvalues().size() - 1);

  VectorXd g = VectorXd::Zero(sys.numVars());
  sys.blocks[worst].accumulateAdjoint(u * u.transpose(), g);
  if (g.squaredNorm() > 0.0) {
    // lambda_max is convex, so the first-order increase is a lower bound.
    const VectorXd xBad = result.x + (10.0 * mStar / g.squaredNorm()) * g;
    const auto badMargins = verifyCertificate(sys, xBad);
    CHECK(*std::min_element(badMargins.begin(), badMargins.end()) < 0.0);
  }
}

TEST_CASE("x = 0 violates a shifted-positive block") {
  // Encodes P > I (negated): -P + I < 0; at x = 0 the margin is negative.
  AffineLmiSystem sys;
  UnknownRef P = sys.layout.addSymmetric("P", 2);
  LmiBlock block(2, "P > I");
  block.addConstant(0, 0, MatrixXd::Identity(2, 2));
  block.addTerm(0, 0, -0.5 * MatrixXd::Identity(2, 2), P, MatrixXd::Identity(2, 2));
  sys.blocks.push_back(std::move(block));
  const auto margins = verifyCertificate(sys, VectorXd::Zero(3));
  CHECK(margins[0] < 0.0);
}

TEST_CASE("iteration limit reports best distance") {
  std::mt19937_64 rng(8);
  auto sys = randomFeasibleSystem(rng);
  SolveOptions opts;
  opts.maxIter = 1;
  auto result = solveFeasibility(sys, opts);
  CHECK(result.status == FeasibilityStatus::IterationLimit);
  CHECK(result.iterations == 1);
  CHECK(result.distance > 0.0);
}

TEST_CASE("structural validation rejects unused variables") {
  AffineLmiSystem sys;
  sys.layout.addFull("x", 1, 1);
  LmiBlock block(1, "constant only");
  block.addConstant(0, 0, MatrixXd::Constant(1, 1, -1.0));
  sys.blocks.push_back(std::move(block));
  CHECK_THROWS_AS(solveFeasibility(sys), StructuralError);
}

TEST_CASE("sparse dump emits block/var/row/col/value lines") {
  auto sys = scalarSystem(-2.0, 1.0);
  std::ostringstream out;
  writeSparseDump(sys, out);
  const std::string text = out.str();
  CHECK(text.find("0 0 0 0 -2") != std::string::npos);
  CHECK(text.find("0 1 0 0 1") != std::string::npos);
}

TEST_CASE("warm start at a feasible point converges immediately") {
  std::mt19937_64 rng(4242);
  VectorXd xStar;
  auto sys = randomFeasibleSystem(rng, &xStar);
  SolveOptions opts;
  opts.warmStart = xStar;
  auto result = solveFeasibility(sys, opts);
  CHECK(result.status == FeasibilityStatus::Feasible);
  CHECK(result.iterations <= 2);
}
