#include "iofts/manifest.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "iofts/analysis_dlmi.hpp"
#include "iofts/bundled_models.hpp"
#include "iofts/errors.hpp"
#include "iofts/gramian.hpp"
#include "iofts/model_io.hpp"
#include "iofts/record_io.hpp"
#include "iofts/simulate.hpp"
#include "iofts/svg.hpp"
#include "iofts/switching.hpp"
#include "iofts/synthesis.hpp"
#include "iofts/worst_case.hpp"

namespace iofts {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitCertified = 0;
constexpr int kExitError = 1;
constexpr int kExitNotCertified = 2;

double wallSeconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json matrixToJsonArray(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (int i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(row);
  }
  return rows;
}

void writeText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write " + path.string());
  out << text;
}

void writeJson(const fs::path& path, const json& j) { writeText(path, j.dump(2) + "\n"); }

IOFTSSpec effectiveSpec(const Model& model, const RunManifest& m) {
  IOFTSSpec spec = model.spec;
  if (m.ts > 0.0)
    spec.omega = TimeGrid::fromNominalStep(spec.omega.t0(), spec.omega.horizon(), m.ts);
  if (m.q > 0.0)
    spec.Q = MatrixFunction::constant(m.q *
                                      Eigen::MatrixXd::Identity(spec.Q.rows(), spec.Q.cols()));
  return spec;
}

json certificateJson(const PwlUnknown& P, const Eigen::VectorXd& x) {
  json nodes = json::array();
  for (int k = 0; k < P.grid.nodeCount(); ++k) {
    nodes.push_back({{"t", P.grid.node(k)}, {"P", matrixToJsonArray(P.value(x, k))}});
  }
  return {{"grid",
           {{"t0", P.grid.t0()}, {"T", P.grid.horizon()}, {"step", P.grid.step()}}},
          {"nodes", nodes}};
}

json switchedCertificateJson(const SwitchedProblem& problem, const Eigen::VectorXd& x) {
  json pieces = json::array();
  for (const auto& piece : problem.pieces) {
    json nodes = json::array();
    for (size_t k = 0; k < piece.nodes.size(); ++k)
      nodes.push_back({{"t", piece.nodes[k]},
                       {"P", matrixToJsonArray(piece.P[k].unpack(x))}});
    pieces.push_back({{"mode", piece.mode}, {"nodes", nodes}});
  }
  return {{"pieces", pieces}};
}

void writeTrajectoryCsv(const fs::path& path, const Trajectory& traj) {
  std::ostringstream out;
  out << std::setprecision(17);
  const int n = traj.x.empty() ? 0 : static_cast<int>(traj.x[0].size());
  const int m = traj.y.empty() ? 0 : static_cast<int>(traj.y[0].size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",y" << i;
  out << ",yQy\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    out << traj.times[k];
    for (int i = 0; i < n; ++i) out << "," << traj.x[k](i);
    for (int i = 0; i < m; ++i) out << "," << traj.y[k](i);
    out << "," << traj.weighted[k] << "\n";
  }
  writeText(path, out.str());
}

void emitTrajectorySvg(const fs::path& path, const Trajectory& traj, const std::string& title) {
  SvgSeries weighted{"y'Qy", traj.times, traj.weighted};
  SvgSeries bound{"bound", {traj.times.front(), traj.times.back()}, {1.0, 1.0}};
  writeSvgChart(path.string(), title, {weighted, bound}, "t [s]", "weighted output");
}

Model loadManifestModel(const RunManifest& m) {
  if (m.modelPath.empty()) throw StructuralError("no model file given");
  return loadModel(m.modelPath);
}

int runValidate(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadManifestModel(m);
  const IOFTSSpec spec = effectiveSpec(model, m);
  std::vector<Violation> violations;
  if (model.switched)
    violations = validate(spec, *model.switched);
  else
    violations = validate(spec, *model.plant);

  json report = json::array();
  for (const auto& v : violations) {
    log << "violation: " << v.field << ": " << v.message << "\n";
    report.push_back({{"field", v.field}, {"time", v.time}, {"message", v.message}});
  }
  writeJson(outDir / "validation.json", {{"violations", report}});
  log << (violations.empty() ? "model OK\n" : "model has violations\n");
  return violations.empty() ? kExitCertified : kExitNotCertified;
}

int runAnalyzeSwitched(const RunManifest& m, std::ostream& log, const fs::path& outDir,
                       const Model& model, const IOFTSSpec& spec) {
  const SwitchedVerdict verdict =
      certifySwitched(*model.switched, spec, switchRegimeFromString(m.regime),
                      m.ts > 0.0 ? m.ts : spec.omega.step(), {}, m.budget, m.seed);
  json out{{"certified", verdict.certified},
           {"status", feasibilityStatusName(verdict.feasibility.status)},
           {"achievedMargin", verdict.feasibility.achievedMargin},
           {"auditPeak", verdict.auditPeak},
           {"soundnessViolated", verdict.soundnessViolated}};
  writeJson(outDir / "verdict.json", out);
  log << "switched " << m.regime << ": "
      << (verdict.certified ? "certified" : "not certified") << ", audit peak "
      << verdict.auditPeak << "\n";
  return verdict.certified ? kExitCertified : kExitNotCertified;
}

int runAnalyze(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadManifestModel(m);
  const IOFTSSpec spec = effectiveSpec(model, m);

  if (m.switched || (model.switched && m.condition != "gramian")) {
    if (!model.switched) throw StructuralError("--switched needs a switching block");
    return runAnalyzeSwitched(m, log, outDir, model, spec);
  }
  if (!model.plant) throw StructuralError("analysis condition needs a plant");
  const LtvSystem& sys = *model.plant;
  const TimeGrid& grid = spec.omega;

  if (m.condition == "gramian") {
    const auto traj = solveDLE(sys, spec, grid, integrationMethodFromString(m.method));
    const auto verdict = checkCondition(traj, sys.C, spec.Q);
    writeJson(outDir / "verdict.json",
              {{"certified", verdict.isIOFTS},
               {"margin", verdict.margin},
               {"worstTime", verdict.worstTime}});
    log << "gramian margin " << verdict.margin << " at t=" << verdict.worstTime << ": "
        << (verdict.isIOFTS ? "certified" : "not certified") << "\n";
    return verdict.isIOFTS ? kExitCertified : kExitNotCertified;
  }

  AnalysisProblem problem;
  double usedTheta = 0.0;
  FeasibilityResult result;
  auto trySolve = [&](AnalysisProblem&& p) {
    problem = std::move(p);
    result = solveAnalysis(problem);
    return result.status == FeasibilityStatus::Feasible;
  };

  bool feasible = false;
  if (m.condition == "dlmi-w2") {
    feasible = trySolve(buildW2Analysis(sys, spec, grid));
  } else if (m.condition == "dlmi-winf") {
    if (spec.omega.t0() != 0.0)
      log << "note: window starts at t0 != 0; the time weight uses (t - t0)\n";
    feasible = trySolve(buildWinfAnalysis(sys, spec, grid));
  } else if (m.condition == "nonproper") {
    const std::vector<double> thetas =
        m.theta > 0.0 ? std::vector<double>{m.theta} : thetaGrid();
    for (double th : thetas) {
      if (trySolve(buildNonProperW2(sys, spec, grid, th))) {
        usedTheta = th;
        feasible = true;
        break;
      }
    }
  } else if (m.condition == "robust") {
    if (!model.uncertain) throw StructuralError("robust condition needs an uncertainty block");
    RobustConstants consts;
    if (m.cConsts.size() == 4) {
      consts.c1 = m.cConsts[0];
      consts.c2 = m.cConsts[1];
      consts.c3 = m.cConsts[2];
      consts.c4 = m.cConsts[3];
    }
    const std::vector<double> thetas =
        m.theta > 0.0 ? std::vector<double>{m.theta} : thetaGrid();
    for (double th : thetas) {
      consts.theta = th;
      if (trySolve(buildRobustW2(*model.uncertain, spec, grid, consts))) {
        usedTheta = th;
        feasible = true;
        break;
      }
    }
  } else {
    throw ParameterError("unknown condition: " + m.condition);
  }

  json out{{"certified", feasible},
           {"status", feasibilityStatusName(result.status)},
           {"achievedMargin", result.achievedMargin},
           {"iterations", result.iterations}};
  if (usedTheta > 0.0) out["theta"] = usedTheta;
  writeJson(outDir / "verdict.json", out);
  if (feasible) writeJson(outDir / "certificate.json", certificateJson(problem.P, result.x));
  log << m.condition << ": " << (feasible ? "certified" : "not certified") << "\n";
  return feasible ? kExitCertified : kExitNotCertified;
}

int runQmax(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadManifestModel(m);
  const IOFTSSpec spec = effectiveSpec(model, m);
  if (!model.plant) throw StructuralError("qmax needs a plant");
  const LtvSystem& sys = *model.plant;
  const TimeGrid& grid = spec.omega;
  const MatrixFunction Qshape = MatrixFunction::identity(sys.outputDim());

  const auto start = std::chrono::steady_clock::now();
  double qmax = 0.0;
  if (m.condition == "gramian") {
    qmax = findQmax(sys, grid, spec.R, Qshape, integrationMethodFromString(m.method));
  } else if (m.condition == "dlmi-w2") {
    const double qGram = findQmax(sys, grid, spec.R, Qshape);
    IOFTSSpec probe = spec;
    auto builder = [&](double q) {
      probe.Q = Qshape.scaled(q);
      return buildW2Analysis(sys, probe, grid);
    };
    qmax = findQmaxDlmi(builder, qGram * 1.05 + 1e-6).qmax;
  } else {
    throw ParameterError("qmax supports the gramian and dlmi-w2 conditions");
  }
  const double wall = wallSeconds(start);

  std::ostringstream csv;
  csv << "condition,ts,q_max,wall_seconds\n"
      << m.condition << "," << grid.step() << "," << std::setprecision(6) << qmax << ","
      << std::setprecision(3) << wall << "\n";
  writeText(outDir / "qmax.csv", csv.str());
  log << csv.str();
  return kExitCertified;
}

int runSynthesize(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadManifestModel(m);
  const IOFTSSpec spec = effectiveSpec(model, m);
  if (!model.plant || !model.plant->B)
    throw StructuralError("synthesis needs a plant with a control input");
  const LtvSystem& sys = *model.plant;
  const TimeGrid& grid = spec.omega;

  const auto problem = buildSynthesisDLMI(sys, spec, grid);
  for (const auto& w : problem.warnings) log << "warning: " << w << "\n";
  const auto result = solveFeasibility(problem.lmis);
  if (result.status != FeasibilityStatus::Feasible) {
    writeJson(outDir / "verdict.json",
              {{"certified", false}, {"status", feasibilityStatusName(result.status)}});
    log << "synthesis: not feasible (" << feasibilityStatusName(result.status) << ")\n";
    return kExitNotCertified;
  }

  const auto sol = extractSynthesis(problem, result.x);
  const Controller ctrl = reconstructController(sol, sys);

  json ctrlJson{{"grid",
                 {{"t0", grid.t0()}, {"T", grid.horizon()}, {"step", grid.step()}}}};
  json nodes = json::array();
  for (int k = 0; k < grid.nodeCount(); ++k) {
    const double t = grid.node(k);
    nodes.push_back({{"t", t},
                     {"AK", matrixToJsonArray(ctrl.AK.eval(t))},
                     {"BK", matrixToJsonArray(ctrl.BK.eval(t))},
                     {"CK", matrixToJsonArray(ctrl.CK.eval(t))},
                     {"DK", matrixToJsonArray(ctrl.DK.eval(t))}});
  }
  ctrlJson["nodes"] = nodes;
  writeJson(outDir / "controller.json", ctrlJson);

  // Re-certification on a 4x finer grid through the exact-condition path.
  const TimeGrid fine = grid.refined(4);
  const LtvSystem loop = closedLoop(sys, ctrl, fine.nodes());
  IOFTSSpec fineSpec = spec;
  fineSpec.omega = fine;
  const auto traj = solveDLE(loop, fineSpec, fine, IntegrationMethod::Rk4);
  const auto verdict = checkCondition(traj, loop.C, fineSpec.Q);

  Model closedModel;
  closedModel.plant = loop;
  closedModel.spec = fineSpec;
  saveModel(closedModel, (outDir / "closed_loop.json").string());

  writeJson(outDir / "verdict.json", {{"certified", verdict.isIOFTS},
                                      {"synthesisMargin", result.achievedMargin},
                                      {"closedLoopMargin", verdict.margin},
                                      {"worstTime", verdict.worstTime}});
  log << "synthesis feasible (margin " << result.achievedMargin
      << "); closed-loop re-certification margin " << verdict.margin << " -> "
      << (verdict.isIOFTS ? "certified" : "NOT certified") << "\n";
  return verdict.isIOFTS ? kExitCertified : kExitNotCertified;
}

int runSimulate(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadManifestModel(m);
  const IOFTSSpec spec = effectiveSpec(model, m);

  Trajectory traj;
  if (m.worstCase) {
    if (model.switched) {
      const auto wc = searchWorstCase(*model.switched, spec, m.budget, m.seed);
      traj = wc.trajectory;
      log << "worst case over " << wc.evaluations << " candidates: peak " << wc.peak << "\n";
    } else {
      const auto wc = searchWorstCase(*model.plant, spec, m.budget, m.seed);
      traj = wc.trajectory;
      log << "worst case over " << wc.evaluations << " candidates: peak " << wc.peak << "\n";
    }
  } else {
    InputSignal w;
    const auto nodes = spec.omega.refined(4).nodes();
    if (!m.inputPath.empty()) {
      const GroundRecord record = loadGroundRecord(m.inputPath);
      w = groundRecordInput(record);
    } else {
      w = InputSignal::constant(
          Eigen::VectorXd::Ones(model.plant ? model.plant->inputDim()
                                            : model.switched->family[0].inputDim()),
          nodes);
    }
    if (model.switched) {
      traj = integrateSwitched(*model.switched, spec, model.switched->resettingTimes, w,
                               nodes, integrationMethodFromString(m.method));
    } else {
      traj = integrateLTV(*model.plant, spec, w, nodes,
                          integrationMethodFromString(m.method));
    }
    log << "simulated peak weighted output " << traj.peakWeighted << " at t="
        << traj.peakTime << "\n";
  }

  writeTrajectoryCsv(outDir / "trajectory.csv", traj);
  if (m.emitSvg) emitTrajectorySvg(outDir / "trajectory.svg", traj, "weighted output");
  writeJson(outDir / "verdict.json",
            {{"peakWeighted", traj.peakWeighted}, {"peakTime", traj.peakTime}});
  return traj.peakWeighted < 1.0 ? kExitCertified : kExitNotCertified;
}

fs::path bundledModel(const RunManifest& m, const std::string& name) {
  if (m.modelsDir.empty()) throw StructuralError("reproduce needs --models-dir");
  return fs::path(m.modelsDir) / name;
}

int runReproduceTable1(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadModel(bundledModel(m, "example1.json").string());
  const LtvSystem& sys = *model.plant;
  const MatrixFunction Qshape = MatrixFunction::identity(1);

  std::ostringstream csv;
  csv << "condition,ts,q_max,wall_seconds\n";

  double prevQ = 0.0;
  Eigen::VectorXd prevCert;
  PwlUnknown prevP;
  bool havePrev = false;
  for (int subintervals : {10, 20, 40, 60}) {
    const TimeGrid grid = TimeGrid::fromSubintervals(0.0, 0.5, subintervals);
    IOFTSSpec probe = model.spec;
    probe.omega = grid;
    auto builder = [&](double qv) {
      probe.Q = Qshape.scaled(qv);
      return buildW2Analysis(sys, probe, grid);
    };
    QmaxSearchOptions sopts;
    if (havePrev) {
      sopts.warmCertificate = liftPwlCertificate(prevP, prevCert, grid);
      sopts.qLo = prevQ;
    }
    const auto start = std::chrono::steady_clock::now();
    const auto search = findQmaxDlmi(builder, 0.4, 1e-2, {}, sopts);
    csv << "dlmi-w2," << grid.step() << "," << std::setprecision(4) << search.qmax << ","
        << std::setprecision(3) << wallSeconds(start) << "\n";
    log << "dlmi-w2 ts=" << grid.step() << " q_max=" << search.qmax << "\n";
    prevQ = search.qmax;
    prevCert = search.certificate;
    VarLayout layout;
    prevP = PwlUnknown::symmetricOnGrid(layout, grid, sys.stateDim(), "P");
    havePrev = true;
  }

  const TimeGrid gramGrid = TimeGrid::fromNominalStep(0.0, 0.5, 0.003);
  const auto start = std::chrono::steady_clock::now();
  const double qGram =
      findQmax(sys, gramGrid, model.spec.R, Qshape, IntegrationMethod::Euler);
  csv << "gramian," << gramGrid.step() << "," << std::setprecision(4) << qGram << ","
      << std::setprecision(3) << wallSeconds(start) << "\n";
  log << "gramian ts=" << gramGrid.step() << " q_max=" << qGram << "\n";

  writeText(outDir / "table1.csv", csv.str());
  return kExitCertified;
}

int runReproduceExample2(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  const Model model = loadModel(bundledModel(m, "example2.json").string());
  IOFTSSpec spec = model.spec;
  if (m.q > 0.0) spec.Q = MatrixFunction::constant(m.q * Eigen::MatrixXd::Identity(1, 1));

  const SwitchedVerdict verdict = certifySwitched(*model.switched, spec,
                                                  SwitchRegime::Uncertain,
                                                  m.ts > 0.0 ? m.ts : 0.01, {}, m.budget,
                                                  m.seed);
  writeJson(outDir / "verdict.json",
            {{"certified", verdict.certified},
             {"auditPeak", verdict.auditPeak},
             {"soundnessViolated", verdict.soundnessViolated}});
  log << "uncertain switching: " << (verdict.certified ? "certified" : "not certified")
      << ", audit peak " << verdict.auditPeak << " over " << m.budget << " candidates\n";
  return verdict.certified ? kExitCertified : kExitNotCertified;
}

int runReproduceBuilding(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  RunManifest synth = m;
  synth.command = "synthesize";
  synth.modelPath = bundledModel(m, "building.json").string();
  if (synth.ts <= 0.0) synth.ts = 0.5;
  return runSynthesize(synth, log, outDir);
}

int dispatch(const RunManifest& m, std::ostream& log, const fs::path& outDir) {
  if (m.command == "validate") return runValidate(m, log, outDir);
  if (m.command == "analyze") return runAnalyze(m, log, outDir);
  if (m.command == "qmax") return runQmax(m, log, outDir);
  if (m.command == "synthesize") return runSynthesize(m, log, outDir);
  if (m.command == "simulate") return runSimulate(m, log, outDir);
  if (m.command == "reproduce") {
    if (m.experiment == "table1") return runReproduceTable1(m, log, outDir);
    if (m.experiment == "example2") return runReproduceExample2(m, log, outDir);
    if (m.experiment == "building") return runReproduceBuilding(m, log, outDir);
    throw ParameterError("unknown experiment: " + m.experiment);
  }
  throw ParameterError("unknown command: " + m.command);
}

}  // namespace

std::string manifestToJson(const RunManifest& m) {
  json j{{"command", m.command},
         {"model", m.modelPath},
         {"condition", m.condition},
         {"switched", m.switched},
         {"regime", m.regime},
         {"ts", m.ts},
         {"q", m.q},
         {"theta", m.theta},
         {"c", m.cConsts},
         {"method", m.method},
         {"seed", m.seed},
         {"budget", m.budget},
         {"experiment", m.experiment},
         {"input", m.inputPath},
         {"worstCase", m.worstCase},
         {"outDir", m.outDir},
         {"svg", m.emitSvg}};
  return j.dump(2) + "\n";
}

RunManifest manifestFromJson(const std::string& text) {
  json j = json::parse(text);
  RunManifest m;
  m.command = j.value("command", "");
  m.modelPath = j.value("model", "");
  m.condition = j.value("condition", "gramian");
  m.switched = j.value("switched", false);
  m.regime = j.value("regime", "known");
  m.ts = j.value("ts", 0.0);
  m.q = j.value("q", 0.0);
  m.theta = j.value("theta", 0.0);
  m.cConsts = j.value("c", std::vector<double>{});
  m.method = j.value("method", "euler");
  m.seed = j.value("seed", 1u);
  m.budget = j.value("budget", 500);
  m.experiment = j.value("experiment", "");
  m.inputPath = j.value("input", "");
  m.worstCase = j.value("worstCase", false);
  m.outDir = j.value("outDir", "out");
  m.emitSvg = j.value("svg", false);
  return m;
}

int run(const RunManifest& manifest, std::ostream& log) {
  try {
    const fs::path outDir(manifest.outDir.empty() ? "out" : manifest.outDir);
    fs::create_directories(outDir);
    writeText(outDir / "manifest.json", manifestToJson(manifest));
    return dispatch(manifest, log, outDir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace iofts
