#include <doctest.h>

#include <cmath>

#include "iofts/bundled_models.hpp"
#include "iofts/errors.hpp"
#include "iofts/matrix_function.hpp"
#include "iofts/model_io.hpp"
#include "iofts/systems.hpp"
#include "iofts/time_grid.hpp"

using namespace iofts;
using Eigen::MatrixXd;

TEST_CASE("time grid node layout and refinement") {
  TimeGrid g(0.0, 0.5, 0.05);
  CHECK(g.nodeCount() == 11);
  CHECK(g.node(0) == doctest::Approx(0.0));
  CHECK(g.node(10) == doctest::Approx(0.5));

  // Refining by an integer factor keeps every coarse node.
  TimeGrid fine = g.refined(4);
  CHECK(fine.nodeCount() == 41);
  for (int k = 0; k < g.nodeCount(); ++k)
    CHECK(std::abs(fine.node(4 * k) - g.node(k)) <= 1e-12);

  CHECK_THROWS_AS(TimeGrid(0.0, 0.5, 0.003), std::invalid_argument);
  TimeGrid snapped = TimeGrid::fromNominalStep(0.0, 0.5, 0.003);
  CHECK(snapped.subintervals() == 167);
  CHECK(snapped.node(snapped.subintervals()) == doctest::Approx(0.5));

  CHECK_THROWS_AS(TimeGrid(0.0, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 0.5, 0.7), std::invalid_argument);
}

TEST_CASE("polynomial evaluation is exact") {
  Model ex1 = makeExample1Model();
  const MatrixFunction& A = ex1.plant->A;

  MatrixXd A0 = A.eval(0.0);
  CHECK(A0(0, 0) == doctest::Approx(0.5));
  CHECK(A0(0, 1) == doctest::Approx(0.1));
  CHECK(A0(1, 0) == doctest::Approx(0.4));
  CHECK(A0(1, 1) == doctest::Approx(-0.3));

  MatrixXd At = A.eval(0.37);
  CHECK(At(0, 0) == doctest::Approx(0.5 + 0.37));
  CHECK(At(1, 1) == doctest::Approx(-0.3 + 0.37));

  MatrixFunction z = MatrixFunction::zero(2, 3);
  CHECK(z.eval(12.8).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sampled evaluation interpolates and clamps") {
  std::vector<double> times{0.0, 0.5, 1.0};
  std::vector<MatrixXd> vals{MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                             MatrixXd::Identity(2, 2)};
  MatrixFunction f = MatrixFunction::sampled(times, vals);
  CHECK((f.eval(0.25) - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK_NOTHROW(f.eval(1.0 + 1e-12));  // inside clamp tolerance
  CHECK_THROWS_AS(f.eval(2.0), RangeError);

  std::vector<MatrixXd> ramp{MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1)};
  MatrixFunction g = MatrixFunction::sampled({0.0, 1.0}, ramp);
  CHECK(g.eval(0.25)(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("polynomial eval is continuous (Lipschitz probe)") {
  Model ex1 = makeExample1Model();
  const MatrixFunction& A = ex1.plant->A;
  const double h = 1e-7;
  for (double t : {0.0, 0.123, 0.32, 0.5 - h}) {
    const double diff = (A.eval(t + h) - A.eval(t)).cwiseAbs().maxCoeff();
    CHECK(diff <= 10.0 * h);  // entries are affine with unit slope
  }
}

TEST_CASE("validate accepts the bundled 2-state plant") {
  Model ex1 = makeExample1Model();
  auto violations = validate(ex1.spec, *ex1.plant);
  CHECK(violations.empty());

  // validate is side-effect free / idempotent
  auto again = validate(ex1.spec, *ex1.plant);
  CHECK(again.size() == violations.size());
}

TEST_CASE("validate flags a non-definite output weight") {
  Model ex1 = makeExample1Model();
  ex1.spec.Q = MatrixFunction::zero(1, 1);
  auto violations = validate(ex1.spec, *ex1.plant);
  REQUIRE(!violations.empty());
  CHECK(violations[0].field == "Q");
  CHECK(violations[0].message.find("positive definite") != std::string::npos);
}

TEST_CASE("validate flags overlapping reset windows") {
  Model ex2 = makeExample2Model(0.2);  // windows around 0.2/0.5/0.75 overlap at 0.2 half-width
  auto violations = validate(ex2.spec, *ex2.switched);
  bool found = false;
  for (const auto& v : violations)
    if (v.message.find("disjoint") != std::string::npos) found = true;
  CHECK(found);

  Model ok = makeExample2Model(0.03);
  CHECK(validate(ok.spec, *ok.switched).empty());
}

TEST_CASE("switched mode lookup is right-continuous") {
  Model ex2 = makeExample2Model(0.03);
  const SwitchedSystem& s = *ex2.switched;
  CHECK(s.modeAt(0.0) == 1);
  CHECK(s.modeAt(0.199) == 1);
  CHECK(s.modeAt(0.2) == 2);
  CHECK(s.modeAt(0.5) == 1);
  CHECK(s.modeAt(0.75) == 2);
  CHECK(s.modeAt(1.0) == 2);
}

TEST_CASE("model JSON round trip is lossless for polynomials") {
  Model ex1 = makeExample1Model();
  Model back = parseModel(modelToJson(ex1));
  REQUIRE(back.plant.has_value());
  CHECK(back.plant->A.entries() == ex1.plant->A.entries());
  CHECK(back.plant->G.entries() == ex1.plant->G.entries());
  CHECK(back.spec.signalClass == SignalClass::W2);
  CHECK(back.spec.omega.t0() == doctest::Approx(0.0));
  CHECK(back.spec.omega.horizon() == doctest::Approx(0.5));

  Model ex2 = makeExample2Model();
  Model back2 = parseModel(modelToJson(ex2));
  REQUIRE(back2.switched.has_value());
  CHECK(back2.switched->family.size() == 2);
  CHECK(back2.switched->resettingTimes == ex2.switched->resettingTimes);
  CHECK(back2.switched->J.entries() == ex2.switched->J.entries());
  CHECK(back2.switched->sigma.size() == 4);
}

TEST_CASE("malformed model files raise schema errors with paths") {
  CHECK_THROWS_AS(parseModel(""), StructuralError);
  CHECK_THROWS_AS(parseModel("{}"), StructuralError);
  try {
    parseModel(R"({"omega":{"t0":0,"T":1},"spec":{"class":"W2","R":[[1]],"Q":[[1]]},"A":[[1]],"C":[[1]]})");
    CHECK(false);
  } catch (const StructuralError& e) {
    CHECK(std::string(e.what()).find("G") != std::string::npos);
  }
}

TEST_CASE("building model assembles the documented chain structure") {
  Model b = makeBuildingModel(sixStoryBuildingParams());
  const MatrixXd A = b.plant->A.eval(0.0);
  REQUIRE(A.rows() == 12);

  // Base floor force balance: -(c0+c1)/m1 and spring partner.
  CHECK(A(0, 0) == doctest::Approx(-(2.4 + 67.0) / 6800.0));
  CHECK(A(0, 1) == doctest::Approx(67.0 / 6800.0));
  CHECK(A(0, 6) == doctest::Approx(-(1200.0 + 33732.0) / 6800.0));
  // Top floor couples only to its lower neighbor.
  CHECK(A(5, 4) == doctest::Approx(38.0 / 5897.0));
  CHECK(A(5, 5) == doctest::Approx(-38.0 / 5897.0));
  CHECK(A(5, 11) == doctest::Approx(-19059.0 / 5897.0));
  // Kinematic identity block.
  CHECK(A(6, 0) == doctest::Approx(1.0));
  CHECK(A(8, 2) == doctest::Approx(1.0));

  const MatrixXd G = b.plant->G.eval(0.0);
  CHECK(G(0, 0) == doctest::Approx(1200.0 / 6800.0));
  CHECK(G(0, 1) == doctest::Approx(2.4 / 6800.0));
  CHECK(G.bottomRows(11).cwiseAbs().maxCoeff() == 0.0);

  const MatrixXd C = b.plant->C.eval(0.0);
  CHECK(C(0, 0) == doctest::Approx(A(0, 0)));
  CHECK(C(0, 6) == doctest::Approx(A(0, 6)));

  CHECK(validate(b.spec, *b.plant).empty());
}
