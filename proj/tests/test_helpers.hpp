#pragma once

#include <random>

#include "iofts/matrix_function.hpp"
#include "iofts/systems.hpp"

namespace iofts::testing {

inline MatrixFunction randomPolyMatrix(std::mt19937_64& rng, int rows, int cols, int degree,
                                       double scale = 1.0) {
  std::uniform_real_distribution<double> coeff(-scale, scale);
  std::vector<std::vector<MatrixFunction::PolyEntry>> entries(
      static_cast<size_t>(rows), std::vector<MatrixFunction::PolyEntry>(static_cast<size_t>(cols)));
  for (auto& row : entries)
    for (auto& entry : row) {
      entry.resize(static_cast<size_t>(degree) + 1);
      for (double& c : entry) c = coeff(rng);
    }
  return MatrixFunction::polynomial(std::move(entries));
}

/// Random strictly proper plant with affine-in-t entries; `shift` < 0 biases
/// the A diagonal toward stability.
inline LtvSystem randomPlant(std::mt19937_64& rng, int n, int m, int r, double shift = 0.0) {
  MatrixFunction A = randomPolyMatrix(rng, n, n, 1);
  if (shift != 0.0) {
    auto entries = A.entries();
    for (int i = 0; i < n; ++i) entries[static_cast<size_t>(i)][static_cast<size_t>(i)][0] += shift;
    A = MatrixFunction::polynomial(entries);
  }
  return LtvSystem{A, std::nullopt, randomPolyMatrix(rng, n, r, 1),
                   randomPolyMatrix(rng, m, n, 1), std::nullopt};
}

inline IOFTSSpec unitSpec(int r, int m, const TimeGrid& omega,
                          SignalClass cls = SignalClass::W2, double q = 1.0) {
  return IOFTSSpec{cls, MatrixFunction::identity(r),
                   MatrixFunction::constant(q * Eigen::MatrixXd::Identity(m, m)), omega};
}

}  // namespace iofts::testing
