#include "iofts/bundled_models.hpp"

#include "iofts/errors.hpp"

namespace iofts {

namespace {

using Entry = MatrixFunction::PolyEntry;

}  // namespace

Model makeExample1Model() {
  Model m;
  m.plant = LtvSystem{
      MatrixFunction::polynomial({{Entry{0.5, 1.0}, Entry{0.1}},
                                  {Entry{0.4}, Entry{-0.3, 1.0}}}),
      std::nullopt,
      MatrixFunction::constant(Eigen::MatrixXd::Ones(2, 1)),
      MatrixFunction::constant(Eigen::MatrixXd::Ones(1, 2)),
      std::nullopt};
  m.spec.signalClass = SignalClass::W2;
  m.spec.R = MatrixFunction::constant(Eigen::MatrixXd::Identity(1, 1));
  m.spec.Q = MatrixFunction::constant(0.3 * Eigen::MatrixXd::Identity(1, 1));
  m.spec.omega = TimeGrid::fromSubintervals(0.0, 0.5, kDefaultOmegaSubintervals);
  return m;
}

Model makeExample2Model(double deltaT) {
  const double rho = 0.5;
  LtvSystem mode1{
      MatrixFunction::polynomial({{Entry{0.5, rho}, Entry{0.1}},
                                  {Entry{0.4}, Entry{-0.3, rho}}}),
      std::nullopt,
      MatrixFunction::constant((Eigen::MatrixXd(2, 1) << 1.0, 1.0).finished()),
      MatrixFunction::constant((Eigen::MatrixXd(1, 2) << 1.0, 1.0).finished()),
      std::nullopt};
  LtvSystem mode2{
      MatrixFunction::polynomial({{Entry{0.15, rho}, Entry{0.2}},
                                  {Entry{1.0}, Entry{-0.25, -rho}}}),
      std::nullopt,
      MatrixFunction::constant((Eigen::MatrixXd(2, 1) << 1.0, 0.0).finished()),
      MatrixFunction::constant((Eigen::MatrixXd(1, 2) << 2.0, 1.0).finished()),
      std::nullopt};

  SwitchedSystem ssys;
  ssys.family = {mode1, mode2};
  ssys.resettingTimes = {0.2, 0.5, 0.75};
  ssys.sigma = {{0.0, 1}, {0.2, 2}, {0.5, 1}, {0.75, 2}};
  ssys.deltaT = {deltaT, deltaT, deltaT};
  ssys.J = MatrixFunction::constant(
      (Eigen::MatrixXd(2, 2) << -1.1, 0.0, 0.0, 0.1).finished());

  Model m;
  m.switched = std::move(ssys);
  m.spec.signalClass = SignalClass::Winf;
  m.spec.R = MatrixFunction::constant(Eigen::MatrixXd::Identity(1, 1));
  m.spec.Q = MatrixFunction::constant(0.14 * Eigen::MatrixXd::Identity(1, 1));
  m.spec.omega = TimeGrid::fromSubintervals(0.0, 1.0, kDefaultOmegaSubintervals);
  return m;
}

BuildingParams sixStoryBuildingParams() {
  // Masses in Mg, stiffness in kN/m, damping in kN s/m; the derived
  // A-matrix entries are then in SI (1/s^2, 1/s) without further scaling.
  BuildingParams p;
  p.masses = {6800, 5897, 5897, 5897, 5897, 5897};
  p.springs = {1200, 33732, 29093, 28621, 24954, 19059};
  p.dampers = {2.4, 67, 58, 57, 50, 38};
  return p;
}

Model makeBuildingModel(const BuildingParams& params) {
  const int N = static_cast<int>(params.masses.size());
  if (N < 2) throw StructuralError("building model needs at least two floors");
  if (static_cast<int>(params.springs.size()) != N ||
      static_cast<int>(params.dampers.size()) != N)
    throw StructuralError("building model: springs/dampers must list k0..k_{N-1}, c0..c_{N-1}");

  const auto& mMass = params.masses;
  const auto& k = params.springs;  // k[0] = isolator
  const auto& c = params.dampers;

  auto chain = [&](const std::vector<double>& coeff) {
    // Tridiagonal force-balance rows: row i couples floors i-1, i, i+1.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
    M(0, 0) = -(coeff[0] + coeff[1]) / mMass[0];
    M(0, 1) = coeff[1] / mMass[0];
    for (int i = 1; i < N - 1; ++i) {
      M(i, i - 1) = coeff[static_cast<size_t>(i)] / mMass[static_cast<size_t>(i)];
      M(i, i) = -(coeff[static_cast<size_t>(i)] + coeff[static_cast<size_t>(i) + 1]) /
                mMass[static_cast<size_t>(i)];
      M(i, i + 1) = coeff[static_cast<size_t>(i) + 1] / mMass[static_cast<size_t>(i)];
    }
    M(N - 1, N - 2) = coeff[static_cast<size_t>(N) - 1] / mMass[static_cast<size_t>(N) - 1];
    M(N - 1, N - 1) = -coeff[static_cast<size_t>(N) - 1] / mMass[static_cast<size_t>(N) - 1];
    return M;
  };

  const Eigen::MatrixXd A1 = chain(c);
  const Eigen::MatrixXd A2 = chain(k);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  A.topLeftCorner(N, N) = A1;
  A.topRightCorner(N, N) = A2;
  A.bottomLeftCorner(N, N) = Eigen::MatrixXd::Identity(N, N);

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2 * N, 1);
  B(0, 0) = 1.0 / mMass[0];

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * N, 2);
  G(0, 0) = k[0] / mMass[0];
  G(0, 1) = c[0] / mMass[0];

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, 2 * N);
  C.leftCols(N) = A1.row(0);
  C.rightCols(N) = A2.row(0);

  Model m;
  m.plant = LtvSystem{MatrixFunction::constant(A),
                      MatrixFunction::constant(B),
                      MatrixFunction::constant(G),
                      MatrixFunction::constant(C),
                      std::nullopt};
  m.spec.signalClass = SignalClass::W2;
  m.spec.R = MatrixFunction::constant(Eigen::MatrixXd::Identity(2, 2));
  m.spec.Q = MatrixFunction::constant(0.1 * Eigen::MatrixXd::Identity(1, 1));
  m.spec.omega = TimeGrid::fromSubintervals(0.0, 35.0, kDefaultOmegaSubintervals);
  return m;
}

}  // namespace iofts
