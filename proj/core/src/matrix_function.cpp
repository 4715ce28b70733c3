#include "iofts/matrix_function.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "iofts/errors.hpp"

namespace iofts {

MatrixFunction MatrixFunction::polynomial(std::vector<std::vector<PolyEntry>> entries) {
  MatrixFunction f;
  f.kind_ = Kind::Polynomial;
  f.rows_ = static_cast<int>(entries.size());
  f.cols_ = f.rows_ > 0 ? static_cast<int>(entries[0].size()) : 0;
  for (const auto& row : entries) {
    if (static_cast<int>(row.size()) != f.cols_)
      throw StructuralError("MatrixFunction: ragged polynomial entry table");
  }
  f.entries_ = std::move(entries);
  return f;
}

MatrixFunction MatrixFunction::constant(const Eigen::MatrixXd& value) {
  std::vector<std::vector<PolyEntry>> entries(value.rows(),
                                              std::vector<PolyEntry>(value.cols()));
  for (int i = 0; i < value.rows(); ++i)
    for (int j = 0; j < value.cols(); ++j) entries[i][j] = {value(i, j)};
  return polynomial(std::move(entries));
}

MatrixFunction MatrixFunction::zero(int rows, int cols) {
  return constant(Eigen::MatrixXd::Zero(rows, cols));
}

MatrixFunction MatrixFunction::identity(int n) {
  return constant(Eigen::MatrixXd::Identity(n, n));
}

MatrixFunction MatrixFunction::sampled(std::vector<double> times,
                                       std::vector<Eigen::MatrixXd> values) {
  if (times.empty() || times.size() != values.size())
    throw StructuralError("MatrixFunction: sample times/values mismatch");
  if (!std::is_sorted(times.begin(), times.end()))
    throw StructuralError("MatrixFunction: sample times must be increasing");
  MatrixFunction f;
  f.kind_ = Kind::Sampled;
  f.rows_ = static_cast<int>(values[0].rows());
  f.cols_ = static_cast<int>(values[0].cols());
  for (const auto& v : values) {
    if (v.rows() != f.rows_ || v.cols() != f.cols_)
      throw StructuralError("MatrixFunction: inconsistent sample dimensions");
  }
  f.times_ = std::move(times);
  f.values_ = std::move(values);
  return f;
}

int MatrixFunction::degree() const {
  if (kind_ == Kind::Sampled) return 1;
  int deg = 0;
  for (const auto& row : entries_)
    for (const auto& entry : row) {
      int d = static_cast<int>(entry.size()) - 1;
      while (d > 0 && entry[static_cast<size_t>(d)] == 0.0) --d;
      deg = std::max(deg, d);
    }
  return deg;
}

Eigen::MatrixXd MatrixFunction::eval(double t) const {
  Eigen::MatrixXd out(rows_, cols_);
  if (kind_ == Kind::Polynomial) {
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) {
        const auto& c = entries_[i][j];
        double v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
        out(i, j) = v;
      }
    return out;
  }
  const double lo = times_.front();
  const double hi = times_.back();
  const double tol = 1e-9 * std::max(hi - lo, 1.0);
  if (t < lo - tol || t > hi + tol)
    throw RangeError("MatrixFunction: query t=" + std::to_string(t) +
                     " outside sampled range [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
  const double tc = std::clamp(t, lo, hi);
  const auto it = std::upper_bound(times_.begin(), times_.end(), tc);
  if (it == times_.begin()) return values_.front();
  if (it == times_.end()) return values_.back();
  const size_t k = static_cast<size_t>(it - times_.begin()) - 1;
  const double t1 = times_[k], t2 = times_[k + 1];
  if (t2 <= t1) return values_[k];
  const double a = (tc - t1) / (t2 - t1);
  return (1.0 - a) * values_[k] + a * values_[k + 1];
}

const std::vector<std::vector<MatrixFunction::PolyEntry>>& MatrixFunction::entries() const {
  if (kind_ != Kind::Polynomial)
    throw StructuralError("MatrixFunction: not a polynomial representation");
  return entries_;
}

const std::vector<double>& MatrixFunction::sampleTimes() const {
  if (kind_ != Kind::Sampled)
    throw StructuralError("MatrixFunction: not a sampled representation");
  return times_;
}

const std::vector<Eigen::MatrixXd>& MatrixFunction::sampleValues() const {
  if (kind_ != Kind::Sampled)
    throw StructuralError("MatrixFunction: not a sampled representation");
  return values_;
}

MatrixFunction MatrixFunction::scaled(double factor) const {
  MatrixFunction f = *this;
  if (kind_ == Kind::Polynomial) {
    for (auto& row : f.entries_)
      for (auto& entry : row)
        for (double& c : entry) c *= factor;
  } else {
    for (auto& v : f.values_) v *= factor;
  }
  return f;
}

double MatrixFunction::boundOn(double t0, double t1) const {
  double bound = 0.0;
  if (kind_ == Kind::Sampled) {
    for (size_t k = 0; k < times_.size(); ++k) {
      if (times_[k] < t0 - 1e-12 || times_[k] > t1 + 1e-12) continue;
      bound = std::max(bound, values_[k].cwiseAbs().maxCoeff());
    }
    return bound;
  }
  const int probes = degree() + 2;
  for (int k = 0; k < probes; ++k) {
    const double t = probes == 1 ? t0 : t0 + (t1 - t0) * k / (probes - 1);
    bound = std::max(bound, eval(t).cwiseAbs().maxCoeff());
  }
  return bound;
}

}  // namespace iofts
