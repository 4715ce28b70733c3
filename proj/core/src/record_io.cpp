#include "iofts/record_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "iofts/errors.hpp"

namespace iofts {

namespace {

/// First-order RC high-pass, forward pass.
std::vector<double> highpass(const std::vector<double>& x, const std::vector<double>& t,
                             double cutoffHz) {
  if (cutoffHz <= 0.0 || x.size() < 2) return x;
  const double rc = 1.0 / (2.0 * M_PI * cutoffHz);
  std::vector<double> y(x.size());
  y[0] = x[0];
  for (size_t k = 1; k < x.size(); ++k) {
    const double dt = std::max(1e-12, t[k] - t[k - 1]);
    const double alpha = rc / (rc + dt);
    y[k] = alpha * (y[k - 1] + x[k] - x[k - 1]);
  }
  return y;
}

std::vector<double> integrateTrapezoid(const std::vector<double>& x,
                                       const std::vector<double>& t) {
  std::vector<double> y(x.size(), 0.0);
  for (size_t k = 1; k < x.size(); ++k)
    y[k] = y[k - 1] + 0.5 * (t[k] - t[k - 1]) * (x[k] + x[k - 1]);
  return y;
}

}  // namespace

GroundRecord parseGroundRecord(const std::string& text, double highpassHz) {
  GroundRecord rec;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    for (char& c : line)
      if (c == ',' || c == ';' || c == '\t') c = ' ';
    std::istringstream ls(line);
    double t, a;
    if (!(ls >> t >> a)) continue;
    rec.times.push_back(t);
    rec.accel.push_back(a);
  }
  if (rec.times.size() < 2)
    throw StructuralError("ground record needs at least two (time, acceleration) samples");
  for (size_t k = 1; k < rec.times.size(); ++k)
    if (rec.times[k] <= rec.times[k - 1])
      throw StructuralError("ground record times must be strictly increasing");

  rec.accel = highpass(rec.accel, rec.times, highpassHz);
  rec.vel = integrateTrapezoid(rec.accel, rec.times);
  rec.vel = highpass(rec.vel, rec.times, highpassHz);
  rec.disp = integrateTrapezoid(rec.vel, rec.times);
  rec.disp = highpass(rec.disp, rec.times, highpassHz);
  return rec;
}

GroundRecord loadGroundRecord(const std::string& path, double highpassHz) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open ground record: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parseGroundRecord(ss.str(), highpassHz);
}

InputSignal groundRecordInput(const GroundRecord& record) {
  InputSignal w;
  w.times = record.times;
  w.values.reserve(record.times.size());
  for (size_t k = 0; k < record.times.size(); ++k) {
    Eigen::VectorXd v(2);
    v << record.disp[k], record.vel[k];
    w.values.push_back(v);
  }
  return w;
}

}  // namespace iofts
