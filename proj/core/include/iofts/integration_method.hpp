#pragma once

#include <string>

#include "iofts/errors.hpp"

namespace iofts {

enum class IntegrationMethod { Euler, Rk4 };

inline std::string integrationMethodName(IntegrationMethod m) {
  return m == IntegrationMethod::Euler ? "euler" : "rk4";
}

inline IntegrationMethod integrationMethodFromString(const std::string& s) {
  if (s == "euler") return IntegrationMethod::Euler;
  if (s == "rk4") return IntegrationMethod::Rk4;
  throw ParameterError("unknown integration method: " + s);
}

}  // namespace iofts
