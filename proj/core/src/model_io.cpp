#include "iofts/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "iofts/errors.hpp"

namespace iofts {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw StructuralError("model schema: " + path + ": " + what);
}

MatrixFunction matrixFromJson(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("sampled")) {
    const json& s = j.at("sampled");
    if (!s.contains("times") || !s.contains("values"))
      fail(path + "/sampled", "needs `times` and `values`");
    std::vector<double> times = s.at("times").get<std::vector<double>>();
    std::vector<Eigen::MatrixXd> values;
    for (const auto& v : s.at("values")) {
      const auto rows = v.get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd M(rows.size(), rows.empty() ? 0 : rows[0].size());
      for (size_t i = 0; i < rows.size(); ++i)
        for (size_t k = 0; k < rows[i].size(); ++k)
          M(static_cast<int>(i), static_cast<int>(k)) = rows[i][k];
      values.push_back(std::move(M));
    }
    return MatrixFunction::sampled(std::move(times), std::move(values));
  }
  if (!j.is_array()) fail(path, "expected an array of rows");
  std::vector<std::vector<MatrixFunction::PolyEntry>> entries;
  for (size_t i = 0; i < j.size(); ++i) {
    const json& row = j[i];
    if (!row.is_array()) fail(path + "[" + std::to_string(i) + "]", "expected a row array");
    std::vector<MatrixFunction::PolyEntry> r;
    for (size_t c = 0; c < row.size(); ++c) {
      const json& cell = row[c];
      MatrixFunction::PolyEntry coeffs;
      if (cell.is_number()) {
        coeffs = {cell.get<double>()};  // bare scalar = constant entry
      } else if (cell.is_array()) {
        coeffs = cell.get<std::vector<double>>();
      } else {
        fail(path + "[" + std::to_string(i) + "][" + std::to_string(c) + "]",
             "expected a number or coefficient list");
      }
      r.push_back(std::move(coeffs));
    }
    entries.push_back(std::move(r));
  }
  return MatrixFunction::polynomial(std::move(entries));
}

json matrixToJson(const MatrixFunction& f) {
  if (f.isSampled()) {
    json values = json::array();
    for (const auto& M : f.sampleValues()) {
      json rows = json::array();
      for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
        rows.push_back(row);
      }
      values.push_back(rows);
    }
    return json{{"sampled", {{"times", f.sampleTimes()}, {"values", values}}}};
  }
  json out = json::array();
  for (const auto& row : f.entries()) {
    json r = json::array();
    for (const auto& entry : row) r.push_back(entry);
    out.push_back(r);
  }
  return out;
}

LtvSystem plantFromJson(const json& j, const std::string& path) {
  LtvSystem sys;
  if (!j.contains("A")) fail(path, "missing `A`");
  if (!j.contains("G")) fail(path, "missing `G`");
  if (!j.contains("C")) fail(path, "missing `C`");
  sys.A = matrixFromJson(j.at("A"), path + "/A");
  sys.G = matrixFromJson(j.at("G"), path + "/G");
  sys.C = matrixFromJson(j.at("C"), path + "/C");
  if (j.contains("B")) sys.B = matrixFromJson(j.at("B"), path + "/B");
  if (j.contains("D")) sys.D = matrixFromJson(j.at("D"), path + "/D");
  return sys;
}

json plantToJson(const LtvSystem& sys) {
  json j;
  j["A"] = matrixToJson(sys.A);
  j["G"] = matrixToJson(sys.G);
  j["C"] = matrixToJson(sys.C);
  if (sys.B) j["B"] = matrixToJson(*sys.B);
  if (sys.D) j["D"] = matrixToJson(*sys.D);
  return j;
}

}  // namespace

Model parseModel(const std::string& jsonText) {
  json j;
  try {
    j = json::parse(jsonText);
  } catch (const json::parse_error& e) {
    throw StructuralError(std::string("model parse: ") + e.what());
  }

  Model model;
  if (!j.contains("omega")) fail("/", "missing `omega`");
  const json& om = j.at("omega");
  if (!om.contains("t0") || !om.contains("T")) fail("/omega", "needs `t0` and `T`");
  const double t0 = om.at("t0").get<double>();
  const double T = om.at("T").get<double>();
  TimeGrid omega = TimeGrid::fromSubintervals(t0, T, kDefaultOmegaSubintervals);

  if (!j.contains("spec")) fail("/", "missing `spec`");
  const json& sp = j.at("spec");
  if (!sp.contains("class") || !sp.contains("R") || !sp.contains("Q"))
    fail("/spec", "needs `class`, `R`, `Q`");
  model.spec.signalClass = signalClassFromString(sp.at("class").get<std::string>());
  model.spec.R = matrixFromJson(sp.at("R"), "/spec/R");
  model.spec.Q = matrixFromJson(sp.at("Q"), "/spec/Q");
  model.spec.omega = omega;

  if (j.contains("A")) model.plant = plantFromJson(j, "/");

  if (j.contains("switching")) {
    const json& sw = j.at("switching");
    SwitchedSystem ssys;
    if (!sw.contains("family") || !sw.at("family").is_array() || sw.at("family").empty())
      fail("/switching/family", "needs at least one mode");
    int idx = 0;
    for (const auto& mode : sw.at("family"))
      ssys.family.push_back(plantFromJson(mode, "/switching/family[" + std::to_string(idx++) + "]"));
    if (sw.contains("sigma")) {
      for (const auto& seg : sw.at("sigma")) {
        if (!seg.contains("from") || !seg.contains("mode")) fail("/switching/sigma", "segments need `from` and `mode`");
        ssys.sigma.push_back({seg.at("from").get<double>(), seg.at("mode").get<int>()});
      }
    } else {
      ssys.sigma.push_back({t0, 1});
    }
    if (sw.contains("resets")) ssys.resettingTimes = sw.at("resets").get<std::vector<double>>();
    if (sw.contains("deltaT")) ssys.deltaT = sw.at("deltaT").get<std::vector<double>>();
    if (sw.contains("J")) {
      ssys.J = matrixFromJson(sw.at("J"), "/switching/J");
    } else {
      const int n = ssys.family[0].stateDim();
      ssys.J = MatrixFunction::identity(n);
    }
    model.switched = std::move(ssys);
  }

  if (j.contains("uncertainty")) {
    if (!model.plant) fail("/uncertainty", "an uncertainty block requires a plant");
    const json& un = j.at("uncertainty");
    UncertainLtvSystem usys;
    usys.base = *model.plant;
    for (const char* name : {"F1", "F2", "E1", "E2", "H"})
      if (!un.contains(name)) fail("/uncertainty", std::string("missing `") + name + "`");
    usys.F1 = matrixFromJson(un.at("F1"), "/uncertainty/F1");
    usys.F2 = matrixFromJson(un.at("F2"), "/uncertainty/F2");
    usys.E1 = matrixFromJson(un.at("E1"), "/uncertainty/E1");
    usys.E2 = matrixFromJson(un.at("E2"), "/uncertainty/E2");
    usys.H = matrixFromJson(un.at("H"), "/uncertainty/H");
    model.uncertain = std::move(usys);
  }

  if (!model.plant && !model.switched) fail("/", "model needs a plant (`A`,`G`,`C`) or a `switching` block");
  return model;
}

Model loadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseModel(ss.str());
}

std::string modelToJson(const Model& model) {
  json j;
  if (model.plant) j = plantToJson(*model.plant);
  j["omega"] = {{"t0", model.spec.omega.t0()}, {"T", model.spec.omega.horizon()}};
  j["spec"] = {{"class", signalClassName(model.spec.signalClass)},
               {"R", matrixToJson(model.spec.R)},
               {"Q", matrixToJson(model.spec.Q)}};
  if (model.switched) {
    const auto& s = *model.switched;
    json sw;
    sw["family"] = json::array();
    for (const auto& mode : s.family) sw["family"].push_back(plantToJson(mode));
    sw["sigma"] = json::array();
    for (const auto& seg : s.sigma) sw["sigma"].push_back({{"from", seg.from}, {"mode", seg.mode}});
    sw["resets"] = s.resettingTimes;
    sw["deltaT"] = s.deltaT;
    sw["J"] = matrixToJson(s.J);
    j["switching"] = sw;
  }
  if (model.uncertain) {
    const auto& u = *model.uncertain;
    j["uncertainty"] = {{"F1", matrixToJson(u.F1)},
                        {"F2", matrixToJson(u.F2)},
                        {"E1", matrixToJson(u.E1)},
                        {"E2", matrixToJson(u.E2)},
                        {"H", matrixToJson(u.H)}};
  }
  return j.dump(2) + "\n";
}

void saveModel(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StructuralError("cannot write model file: " + path);
  out << modelToJson(model);
}

}  // namespace iofts
