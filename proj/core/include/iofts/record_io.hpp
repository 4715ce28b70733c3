#pragma once

#include <string>
#include <vector>

#include "iofts/simulate.hpp"

namespace iofts {

/// Ground-motion record: acceleration as read (after high-pass drift
/// removal), velocity and displacement by trapezoid integration.
struct GroundRecord {
  std::vector<double> times;
  std::vector<double> accel;
  std::vector<double> vel;
  std::vector<double> disp;
};

/// Read a two-column CSV (time, ground acceleration; comma or whitespace
/// separated, `#` comments). A first-order high-pass at `highpassHz`
/// (default 0.05 Hz) is applied before each integration stage to remove
/// drift.
GroundRecord loadGroundRecord(const std::string& path, double highpassHz = 0.05);
GroundRecord parseGroundRecord(const std::string& text, double highpassHz = 0.05);

/// Disturbance for the building model: w = [ground displacement, velocity].
InputSignal groundRecordInput(const GroundRecord& record);

}  // namespace iofts
