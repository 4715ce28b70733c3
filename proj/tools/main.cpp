#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "iofts/manifest.hpp"

#ifndef IOFTS_MODELS_DIR
#define IOFTS_MODELS_DIR "models"
#endif

namespace {

void addCommonFlags(CLI::App* cmd, iofts::RunManifest& m) {
  cmd->add_option("--ts", m.ts, "sample time (snapped to an exact divisor of the window)");
  cmd->add_option("--q", m.q, "override the output weight with q * I");
  cmd->add_option("--seed", m.seed, "random seed");
  cmd->add_option("--out", m.outDir, "output directory");
  cmd->add_option("--method", m.method, "integrator: euler | rk4");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-window disturbance-to-output certification toolkit"};
  app.require_subcommand(1);

  iofts::RunManifest m;
  m.modelsDir = IOFTS_MODELS_DIR;
  m.outDir = "out";
  m.method = "euler";

  auto* validate = app.add_subcommand("validate", "check a model file against its spec");
  validate->add_option("model", m.modelPath, "model JSON file")->required();
  addCommonFlags(validate, m);

  auto* analyze = app.add_subcommand("analyze", "certify the bounded-output property");
  analyze->add_option("model", m.modelPath, "model JSON file")->required();
  analyze->add_option("--condition", m.condition,
                      "gramian | dlmi-w2 | dlmi-winf | nonproper | robust");
  analyze->add_flag("--switched", m.switched, "use the switching certification path");
  analyze->add_option("--regime", m.regime, "known | arbitrary | uncertain");
  analyze->add_option("--theta", m.theta, "fixed multiplier (default: sweep)");
  analyze
      ->add_option("--c", m.cConsts, "c1,c2,c3,c4 multipliers for the robust condition")
      ->delimiter(',');
  analyze->add_option("--budget", m.budget, "simulation-audit budget");
  addCommonFlags(analyze, m);

  auto* qmax = app.add_subcommand("qmax", "largest certified output weight");
  qmax->add_option("model", m.modelPath, "model JSON file")->required();
  qmax->add_option("--condition", m.condition, "gramian | dlmi-w2");
  addCommonFlags(qmax, m);

  auto* synthesize =
      app.add_subcommand("synthesize", "design an output-feedback controller and re-certify");
  synthesize->add_option("model", m.modelPath, "model JSON file")->required();
  addCommonFlags(synthesize, m);

  auto* simulate = app.add_subcommand("simulate", "integrate a disturbance response");
  simulate->add_option("model", m.modelPath, "model JSON file")->required();
  simulate->add_option("--input", m.inputPath, "two-column ground record CSV (t, accel)");
  simulate->add_flag("--worst-case", m.worstCase, "adversarial disturbance search");
  simulate->add_option("--budget", m.budget, "worst-case candidate budget");
  simulate->add_flag("--svg", m.emitSvg, "emit an SVG plot of the weighted output");
  addCommonFlags(simulate, m);

  auto* reproduce = app.add_subcommand("reproduce", "re-run a bundled experiment");
  reproduce->add_option("experiment", m.experiment, "table1 | example2 | building")
      ->required();
  reproduce->add_option("--models-dir", m.modelsDir, "bundled model directory");
  reproduce->add_option("--budget", m.budget, "audit budget");
  addCommonFlags(reproduce, m);

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) m.command = "validate";
  if (analyze->parsed()) m.command = "analyze";
  if (qmax->parsed()) m.command = "qmax";
  if (synthesize->parsed()) m.command = "synthesize";
  if (simulate->parsed()) m.command = "simulate";
  if (reproduce->parsed()) m.command = "reproduce";

  return iofts::run(m, std::cout);
}
