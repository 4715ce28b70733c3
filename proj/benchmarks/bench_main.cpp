#include <benchmark/benchmark.h>

#include "iofts/analysis_dlmi.hpp"
#include "iofts/bundled_models.hpp"
#include "iofts/gramian.hpp"
#include "iofts/simulate.hpp"
#include "iofts/worst_case.hpp"

namespace {

using namespace iofts;

void BM_GramianSolve(benchmark::State& state) {
  Model m = makeExample1Model();
  const TimeGrid grid = TimeGrid::fromSubintervals(0.0, 0.5, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto traj = solveDLE(*m.plant, m.spec, grid, IntegrationMethod::Rk4);
    benchmark::DoNotOptimize(traj.W.back());
  }
}
BENCHMARK(BM_GramianSolve)->Arg(167)->Arg(1000);

void BM_DlmiBuild(benchmark::State& state) {
  Model m = makeExample1Model();
  const TimeGrid grid = TimeGrid::fromSubintervals(0.0, 0.5, static_cast<int>(state.range(0)));
  IOFTSSpec spec = m.spec;
  spec.omega = grid;
  for (auto _ : state) {
    auto problem = buildW2Analysis(*m.plant, spec, grid);
    benchmark::DoNotOptimize(problem.lmis.blocks.size());
  }
}
BENCHMARK(BM_DlmiBuild)->Arg(10)->Arg(60);

void BM_DlmiSolve(benchmark::State& state) {
  Model m = makeExample1Model();
  const TimeGrid grid = TimeGrid::fromSubintervals(0.0, 0.5, static_cast<int>(state.range(0)));
  IOFTSSpec spec = m.spec;
  spec.omega = grid;
  spec.Q = MatrixFunction::constant(0.15 * Eigen::MatrixXd::Identity(1, 1));
  for (auto _ : state) {
    auto problem = buildW2Analysis(*m.plant, spec, grid);
    auto result = solveAnalysis(problem);
    benchmark::DoNotOptimize(result.status);
  }
}
BENCHMARK(BM_DlmiSolve)->Arg(10)->Arg(20);

void BM_IntegrateLTV(benchmark::State& state) {
  Model m = makeBuildingModel(sixStoryBuildingParams());
  const TimeGrid grid = TimeGrid::fromSubintervals(0.0, 35.0, 2800);
  const auto nodes = grid.nodes();
  const InputSignal w = InputSignal::constant(Eigen::VectorXd::Ones(2), nodes);
  for (auto _ : state) {
    auto traj = integrateLTV(*m.plant, m.spec, w, nodes);
    benchmark::DoNotOptimize(traj.peakWeighted);
  }
}
BENCHMARK(BM_IntegrateLTV);

void BM_WorstCaseSearch(benchmark::State& state) {
  Model m = makeExample2Model(0.03);
  for (auto _ : state) {
    auto wc = searchWorstCase(*m.switched, m.spec, 50, 7);
    benchmark::DoNotOptimize(wc.peak);
  }
}
BENCHMARK(BM_WorstCaseSearch);

}  // namespace

BENCHMARK_MAIN();
