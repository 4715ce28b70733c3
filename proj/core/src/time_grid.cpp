#include "iofts/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iofts {

TimeGrid::TimeGrid(double t0, double horizon, double step)
    : t0_(t0), horizon_(horizon), step_(step) {
  if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
  if (!(step > 0.0)) throw std::invalid_argument("TimeGrid: step must be > 0");
  if (step > horizon * (1.0 + 1e-12))
    throw std::invalid_argument("TimeGrid: step exceeds horizon");
  const double ratio = horizon / step;
  subintervals_ = static_cast<int>(std::lround(ratio));
  if (subintervals_ < 1 ||
      std::abs(t0 + subintervals_ * step - (t0 + horizon)) > 1e-9 * horizon) {
    throw std::invalid_argument("TimeGrid: step " + std::to_string(step) +
                                " does not divide horizon " + std::to_string(horizon));
  }
}

TimeGrid TimeGrid::fromSubintervals(double t0, double horizon, int subintervals) {
  if (subintervals < 1) throw std::invalid_argument("TimeGrid: need >= 1 subintervals");
  return TimeGrid(t0, horizon, horizon / subintervals);
}

TimeGrid TimeGrid::fromNominalStep(double t0, double horizon, double nominal_step) {
  if (!(nominal_step > 0.0)) throw std::invalid_argument("TimeGrid: step must be > 0");
  int m = static_cast<int>(std::lround(horizon / nominal_step));
  if (m < 1) m = 1;
  return fromSubintervals(t0, horizon, m);
}

double TimeGrid::node(int k) const {
  if (k < 0 || k > subintervals_) throw std::out_of_range("TimeGrid::node");
  if (k == subintervals_) return t0_ + horizon_;
  return t0_ + k * step_;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(nodeCount());
  for (int k = 0; k < nodeCount(); ++k) out[k] = node(k);
  return out;
}

int TimeGrid::indexOf(double t, double tol) const {
  const int k = static_cast<int>(std::lround((t - t0_) / step_));
  if (k < 0 || k > subintervals_) return -1;
  return std::abs(node(k) - t) <= tol ? k : -1;
}

bool TimeGrid::contains(double t) const {
  return t >= t0_ - clampTolerance() && t <= end() + clampTolerance();
}

TimeGrid TimeGrid::refined(int factor) const {
  if (factor < 1) throw std::invalid_argument("TimeGrid::refined: factor must be >= 1");
  return fromSubintervals(t0_, horizon_, subintervals_ * factor);
}

}  // namespace iofts
