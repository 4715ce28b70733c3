#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iofts {

/// Everything that determines a run; serialized next to the outputs so any
/// result directory can be reproduced. Identical manifest + seed gives
/// identical artifacts (wall-time columns aside).
struct RunManifest {
  std::string command;          // analyze | qmax | synthesize | simulate | reproduce | validate
  std::string modelPath;
  std::string condition = "gramian";  // gramian | dlmi-w2 | dlmi-winf | nonproper | robust
  bool switched = false;
  std::string regime = "known";       // known | arbitrary | uncertain
  double ts = 0.0;                    // 0 = model-default grid
  double q = 0.0;                     // 0 = keep the model's Q
  double theta = 0.0;                 // 0 = sweep the built-in grid
  std::vector<double> cConsts;        // c1..c4 for the robust condition
  std::string method = "euler";       // gramian/simulation integrator
  unsigned seed = 1;
  int budget = 500;
  std::string experiment;             // reproduce: table1 | example2 | building
  std::string inputPath;              // simulate: ground record CSV
  bool worstCase = false;             // simulate: adversarial search
  std::string outDir = "out";
  bool emitSvg = false;
  std::string modelsDir;              // bundled-model directory for reproduce
};

std::string manifestToJson(const RunManifest& m);
RunManifest manifestFromJson(const std::string& text);

/// Execute a manifest: dispatches to the analysis, search, synthesis,
/// simulation or reproduction pipelines, writes the manifest plus verdict
/// and artifact files into outDir. Returns 0 (certified/success),
/// 2 (not certified / violations found) or 1 (error).
int run(const RunManifest& manifest, std::ostream& log);

}  // namespace iofts
