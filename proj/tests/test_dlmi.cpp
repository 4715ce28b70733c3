#include <doctest.h>

#include <cmath>
#include <random>

#include "iofts/analysis_dlmi.hpp"
#include "iofts/bundled_models.hpp"
#include "iofts/errors.hpp"
#include "iofts/gramian.hpp"
#include "iofts/simulate.hpp"
#include "test_helpers.hpp"

using namespace iofts;
using iofts::testing::unitSpec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

IOFTSSpec scaledSpec(const Model& model, double q, SignalClass cls) {
  IOFTSSpec spec = model.spec;
  spec.signalClass = cls;
  spec.Q = MatrixFunction::constant(q * MatrixXd::Identity(spec.Q.rows(), spec.Q.cols()));
  return spec;
}

AnalysisProblem example1Problem(double q, const TimeGrid& grid) {
  Model m = makeExample1Model();
  IOFTSSpec spec = scaledSpec(m, q, SignalClass::W2);
  spec.omega = grid;
  return buildW2Analysis(*m.plant, spec, grid);
}

}  // namespace

TEST_CASE("example-1 DLMI feasibility at the published coarse point") {
  TimeGrid grid(0.0, 0.5, 0.05);
  auto problem = example1Problem(0.2, grid);
  auto result = solveAnalysis(problem);
  CHECK(result.status == FeasibilityStatus::Feasible);
  CHECK(result.achievedMargin >= 1e-6);

  // Certificate passes the trajectory audit: x'P(t)x stays below 1 under
  // random unit-energy disturbances.
  Model m = makeExample1Model();
  IOFTSSpec spec = scaledSpec(m, 0.2, SignalClass::W2);
  spec.omega = grid;
  const double worstV =
      auditCertificateByTrajectories(*m.plant, spec, problem.P, result.x, 100, 42);
  CHECK(worstV < 1.0);
}

TEST_CASE("example-1 DLMI q_max trend is monotone and dominated by the exact value") {
  Model m = makeExample1Model();
  const double qGram = findQmax(*m.plant, TimeGrid::fromNominalStep(0.0, 0.5, 0.003),
                                m.spec.R, MatrixFunction::identity(1));

  const double published[] = {0.2, 0.25, 0.29};
  const int subintervals[] = {10, 20, 40};
  double prev = 0.0;
  VectorXd coarseCert;
  PwlUnknown coarseP;
  for (int i = 0; i < 3; ++i) {
    TimeGrid grid = TimeGrid::fromSubintervals(0.0, 0.5, subintervals[i]);
    QmaxSearchOptions sopts;
    if (coarseCert.size() > 0) {
      sopts.warmCertificate = liftPwlCertificate(coarseP, coarseCert, grid);
      sopts.qLo = prev;
    }
    auto search = findQmaxDlmi([&](double q) { return example1Problem(q, grid); }, qGram,
                               1e-2, {}, sopts);
    INFO("subintervals=", subintervals[i], " qmax=", search.qmax);
    CHECK(search.qmax >= prev - 1e-9);              // nested-grid monotonicity
    CHECK(search.qmax <= qGram + 0.01);             // sufficiency audit
    CHECK(std::abs(search.qmax - published[i]) <= 0.05);
    prev = search.qmax;
    coarseCert = search.certificate;
    VarLayout sameLayout;
    coarseP = PwlUnknown::symmetricOnGrid(sameLayout, grid, 2, "P");
  }
}

TEST_CASE("zero input and output channels are feasible via a decaying certificate") {
  LtvSystem sys{MatrixFunction::polynomial({{{0.5, 1.0}, {0.1}}, {{0.4}, {-0.3, 1.0}}}),
                std::nullopt, MatrixFunction::zero(2, 1), MatrixFunction::zero(1, 2),
                std::nullopt};
  TimeGrid grid(0.0, 0.5, 0.05);
  auto spec = unitSpec(1, 1, grid, SignalClass::W2, 5.0);
  auto problem = buildW2Analysis(sys, spec, grid);
  auto result = solveAnalysis(problem);
  CHECK(result.status == FeasibilityStatus::Feasible);
}

TEST_CASE("amplitude-bounded output block vanishes at the window start") {
  TimeGrid grid(0.0, 1.0, 0.25);
  LtvSystem sys{MatrixFunction::zero(1, 1), std::nullopt, MatrixFunction::identity(1),
                MatrixFunction::identity(1), std::nullopt};
  auto spec = unitSpec(1, 1, grid, SignalClass::Winf, 0.5);
  auto problem = buildWinfAnalysis(sys, spec, grid);

  // output@0 must coincide with positivity@0 (time weight zero at t0).
  const LmiBlock* output0 = nullptr;
  const LmiBlock* positivity0 = nullptr;
  for (const auto& b : problem.lmis.blocks) {
    if (b.label() == "output@0") output0 = &b;
    if (b.label() == "positivity@0") positivity0 = &b;
  }
  REQUIRE(output0 != nullptr);
  REQUIRE(positivity0 != nullptr);
  VectorXd x = VectorXd::Constant(problem.lmis.numVars(), 0.37);
  CHECK((output0->evaluate(x) - positivity0->evaluate(x)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("amplitude-bounded scalar integrator certifies Q=0.5 on [0,1]") {
  TimeGrid grid(0.0, 1.0, 0.02);
  LtvSystem sys{MatrixFunction::zero(1, 1), std::nullopt, MatrixFunction::identity(1),
                MatrixFunction::identity(1), std::nullopt};
  auto spec = unitSpec(1, 1, grid, SignalClass::Winf, 0.5);

  // Simulated peak under the worst amplitude-1 input is 0.5 * t^2 <= 0.5.
  auto w = InputSignal::constant(Eigen::VectorXd::Ones(1), grid.nodes());
  auto traj = integrateLTV(sys, spec, w, grid);
  CHECK(traj.peakWeighted == doctest::Approx(0.5).epsilon(0.01));

  auto problem = buildWinfAnalysis(sys, spec, grid);
  auto result = solveAnalysis(problem);
  CHECK(result.status == FeasibilityStatus::Feasible);
}

TEST_CASE("each switching-family member alone fails the amplitude condition at Q=0.12") {
  Model ex2 = makeExample2Model(0.03);
  for (const LtvSystem& sub : ex2.switched->family) {
    for (int subintervals : {20, 50}) {
      TimeGrid grid = TimeGrid::fromSubintervals(0.0, 1.0, subintervals);
      auto spec = unitSpec(1, 1, grid, SignalClass::Winf, 0.12);
      auto problem = buildWinfAnalysis(sub, spec, grid);
      auto result = solveAnalysis(problem);
      CHECK(result.status != FeasibilityStatus::Feasible);
    }
  }
}

TEST_CASE("direct-term condition reduces algebraically when D = 0") {
  TimeGrid grid(0.0, 1.0, 0.1);
  LtvSystem sys{MatrixFunction::constant(MatrixXd::Constant(1, 1, -1.0)), std::nullopt,
                MatrixFunction::identity(1), MatrixFunction::identity(1), std::nullopt};
  auto spec = unitSpec(1, 1, grid, SignalClass::W2, 0.2);
  auto problem = buildNonProperW2(sys, spec, grid, 2.0);
  auto result = solveAnalysis(problem);
  CHECK(result.status == FeasibilityStatus::Feasible);
  CHECK_THROWS_AS(buildNonProperW2(sys, spec, grid, 1.0), ParameterError);
}

TEST_CASE("pure direct term: the weight condition pins q_max at (theta-1)/(2 theta)") {
  TimeGrid grid(0.0, 1.0, 0.1);
  LtvSystem sys{MatrixFunction::zero(1, 1), std::nullopt, MatrixFunction::identity(1),
                MatrixFunction::zero(1, 1),
                MatrixFunction::identity(1)};  // C = 0, D = 1

  for (double theta : {2.0, 10.0, 100.0}) {
    auto builder = [&](double q) {
      auto spec = unitSpec(1, 1, grid, SignalClass::W2, q);
      return buildNonProperW2(sys, spec, grid, theta);
    };
    auto search = findQmaxDlmi(builder, 1.0, 1e-3);
    const double expected = (theta - 1.0) / (2.0 * theta);
    CHECK(search.qmax == doctest::Approx(expected).epsilon(0.02));
  }
  // The theta sweep approaches 1/2 from below.
  double best = 0.0;
  for (double theta : thetaGrid()) {
    auto builder = [&](double q) {
      auto spec = unitSpec(1, 1, grid, SignalClass::W2, q);
      return buildNonProperW2(sys, spec, grid, theta);
    };
    best = std::max(best, findQmaxDlmi(builder, 1.0, 1e-3).qmax);
  }
  CHECK(best > 0.47);
  CHECK(best < 0.5);
}

TEST_CASE("example-1 with a direct term: solver verdict is backed by simulation") {
  Model m = makeExample1Model();
  LtvSystem sys = *m.plant;
  sys.D = MatrixFunction::constant(MatrixXd::Constant(1, 1, 0.1));
  TimeGrid grid(0.0, 0.5, 0.025);
  auto spec = unitSpec(1, 1, grid, SignalClass::W2, 0.1);

  bool feasible = false;
  PwlUnknown certP;
  VectorXd certX;
  for (double theta : thetaGrid()) {
    auto problem = buildNonProperW2(sys, spec, grid, theta);
    auto result = solveAnalysis(problem);
    if (result.status == FeasibilityStatus::Feasible) {
      feasible = true;
      certP = problem.P;
      certX = result.x;
      break;
    }
  }
  REQUIRE(feasible);

  // Monte-Carlo audit: no admissible unit-energy input pushes y'Qy to 1.
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto nodes = grid.refined(4).nodes();
  for (int trial = 0; trial < 50; ++trial) {
    InputSignal w;
    w.times = nodes;
    for (size_t k = 0; k < nodes.size(); ++k)
      w.values.push_back(Eigen::VectorXd::Constant(1, gauss(rng)));
    const double energy = w.energy(spec.R);
    for (auto& v : w.values) v /= std::sqrt(energy);
    auto traj = integrateLTV(sys, spec, w, nodes);
    CHECK(traj.peakWeighted < 1.0);
  }
}

TEST_CASE("uncertainty-free robust blocks match the direct-term condition") {
  Model m = makeExample1Model();
  UncertainLtvSystem usys;
  usys.base = *m.plant;
  usys.F1 = MatrixFunction::zero(2, 1);
  usys.F2 = MatrixFunction::zero(1, 1);
  usys.E1 = MatrixFunction::zero(1, 2);
  usys.E2 = MatrixFunction::zero(1, 1);
  usys.H = MatrixFunction::zero(1, 1);

  TimeGrid grid(0.0, 0.5, 0.05);
  RobustConstants consts;
  consts.theta = 2.0;

  for (double q : {0.05, 0.12}) {
    auto spec = unitSpec(1, 1, grid, SignalClass::W2, q);
    auto robust = solveAnalysis(buildRobustW2(usys, spec, grid, consts));
    auto nonproper = solveAnalysis(buildNonProperW2(*m.plant, spec, grid, consts.theta));
    CHECK((robust.status == FeasibilityStatus::Feasible) ==
          (nonproper.status == FeasibilityStatus::Feasible));
  }
}

TEST_CASE("unit uncertainty gain is structurally infeasible") {
  Model m = makeExample1Model();
  UncertainLtvSystem usys;
  usys.base = *m.plant;
  usys.F1 = MatrixFunction::zero(2, 1);
  usys.F2 = MatrixFunction::zero(1, 1);
  usys.E1 = MatrixFunction::zero(1, 2);
  usys.E2 = MatrixFunction::zero(1, 1);
  usys.H = MatrixFunction::identity(1);

  TimeGrid grid(0.0, 0.5, 0.1);
  auto spec = unitSpec(1, 1, grid, SignalClass::W2, 0.1);
  auto problem = buildRobustW2(usys, spec, grid, RobustConstants{});
  REQUIRE(problem.structuralInfeasibility.has_value());
  auto result = solveAnalysis(problem);
  CHECK(result.status == FeasibilityStatus::InfeasibleAtTolerance);
}

TEST_CASE("robust certificate survives random admissible uncertainty draws") {
  Model m = makeExample1Model();
  UncertainLtvSystem usys;
  usys.base = *m.plant;
  usys.F1 = m.plant->G;                                 // n x 1
  usys.F2 = MatrixFunction::zero(1, 1);
  usys.E1 = MatrixFunction::constant(0.1 * MatrixXd::Identity(2, 2));
  usys.H = MatrixFunction::zero(2, 1);
  usys.E2 = MatrixFunction::zero(2, 1);

  // E1 is 2x2 here, so H must be 2x1 and F1 2x1: q=1, p=2.
  TimeGrid grid(0.0, 0.5, 0.025);
  auto spec = unitSpec(1, 1, grid, SignalClass::W2, 0.1);

  bool feasible = false;
  for (double theta : thetaGrid()) {
    RobustConstants consts;
    consts.theta = theta;
    auto problem = buildRobustW2(usys, spec, grid, consts);
    auto result = solveAnalysis(problem);
    if (result.status == FeasibilityStatus::Feasible) {
      feasible = true;
      break;
    }
  }
  REQUIRE(feasible);

  // 50 random admissible uncertainty realizations, worst-case-flavored
  // inputs: the weighted output must stay below 1.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto nodes = grid.refined(4).nodes();
  for (int trial = 0; trial < 50; ++trial) {
    // Piecewise-constant Delta(t) (1x2 here) with ||Delta|| <= 1.
    std::vector<Eigen::MatrixXd> deltas;
    for (size_t k = 0; k < nodes.size(); ++k) {
      Eigen::MatrixXd d(1, 2);
      d << u(rng), u(rng);
      const double nrm = d.norm();
      if (nrm > 1.0) d /= nrm;
      deltas.push_back(d);
    }
    MatrixFunction Aeff = MatrixFunction::sampled(
        nodes, [&] {
          std::vector<Eigen::MatrixXd> out;
          for (size_t k = 0; k < nodes.size(); ++k)
            out.push_back(m.plant->A.eval(nodes[k]) +
                          usys.F1.eval(nodes[k]) * deltas[k] * usys.E1.eval(nodes[k]));
          return out;
        }());
    LtvSystem perturbed{Aeff, std::nullopt, m.plant->G, m.plant->C, std::nullopt};

    InputSignal w;
    w.times = nodes;
    for (size_t k = 0; k < nodes.size(); ++k)
      w.values.push_back(Eigen::VectorXd::Constant(1, u(rng)));
    const double energy = w.energy(spec.R);
    for (auto& v : w.values) v /= std::sqrt(energy);

    auto traj = integrateLTV(perturbed, spec, w, nodes);
    CHECK(traj.peakWeighted < 1.0);
  }
}
