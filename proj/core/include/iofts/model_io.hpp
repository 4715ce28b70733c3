#pragma once

#include <optional>
#include <string>

#include "iofts/systems.hpp"

namespace iofts {

/// A model file: a plant and/or a switching structure, plus the
/// certification spec. See README for the JSON schema; polynomial entries
/// round-trip losslessly.
struct Model {
  std::optional<LtvSystem> plant;
  std::optional<SwitchedSystem> switched;
  std::optional<UncertainLtvSystem> uncertain;  // plant + uncertainty block
  IOFTSSpec spec;

  bool isSwitched() const { return switched.has_value(); }
};

/// Subdivision count used for spec.omega when the caller has not chosen a
/// sample time yet (model files store only {t0, T}).
inline constexpr int kDefaultOmegaSubintervals = 100;

Model loadModel(const std::string& path);
Model parseModel(const std::string& jsonText);
std::string modelToJson(const Model& model);
void saveModel(const Model& model, const std::string& path);

}  // namespace iofts
