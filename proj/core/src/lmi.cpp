#include "iofts/lmi.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "iofts/errors.hpp"
#include "iofts/parallel.hpp"

namespace iofts {

int UnknownRef::varIndex(int i, int j) const {
  if (symmetric) {
    if (i < j) std::swap(i, j);
    return firstVar + j * rows - j * (j - 1) / 2 + (i - j);
  }
  return firstVar + i * cols + j;
}

Eigen::MatrixXd UnknownRef::unpack(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd M(rows, cols);
  if (symmetric) {
    for (int j = 0; j < cols; ++j)
      for (int i = j; i < rows; ++i) M(i, j) = M(j, i) = x(varIndex(i, j));
  } else {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = x(varIndex(i, j));
  }
  return M;
}

void UnknownRef::scatterGradient(const Eigen::MatrixXd& Gmat, Eigen::VectorXd& g) const {
  if (symmetric) {
    for (int j = 0; j < cols; ++j) {
      g(varIndex(j, j)) += Gmat(j, j);
      for (int i = j + 1; i < rows; ++i) g(varIndex(i, j)) += Gmat(i, j) + Gmat(j, i);
    }
  } else {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) g(varIndex(i, j)) += Gmat(i, j);
  }
}

UnknownRef VarLayout::addSymmetric(const std::string& name, int n) {
  UnknownRef ref{count_, n, n, true};
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i)
      names_.push_back(name + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
  count_ += ref.scalarCount();
  return ref;
}

UnknownRef VarLayout::addFull(const std::string& name, int rows, int cols) {
  UnknownRef ref{count_, rows, cols, false};
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      names_.push_back(name + "(" + std::to_string(i) + "," + std::to_string(j) + ")");
  count_ += ref.scalarCount();
  return ref;
}

LmiBlock::LmiBlock(int dim, std::string label)
    : dim_(dim), label_(std::move(label)), constant_(Eigen::MatrixXd::Zero(dim, dim)) {}

void LmiBlock::addConstant(int row0, int col0, const Eigen::MatrixXd& M) {
  if (row0 < 0 || col0 < 0 || row0 + M.rows() > dim_ || col0 + M.cols() > dim_)
    throw StructuralError("LmiBlock(" + label_ + "): constant placement out of range");
  if (row0 == col0) {
    if ((M - M.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * std::max(1.0, M.cwiseAbs().maxCoeff()))
      throw StructuralError("LmiBlock(" + label_ + "): diagonal constant must be symmetric");
    constant_.block(row0, col0, M.rows(), M.cols()) += M;
  } else {
    constant_.block(row0, col0, M.rows(), M.cols()) += M;
    constant_.block(col0, row0, M.cols(), M.rows()) += M.transpose();
  }
}

void LmiBlock::addTerm(int row0, int col0, const Eigen::MatrixXd& left, const UnknownRef& unk,
                       const Eigen::MatrixXd& right, bool transposeUnknown) {
  const int ur = transposeUnknown ? unk.cols : unk.rows;
  const int uc = transposeUnknown ? unk.rows : unk.cols;
  if (left.cols() != ur || right.rows() != uc)
    throw StructuralError("LmiBlock(" + label_ + "): term inner dimensions mismatch");
  if (row0 < 0 || col0 < 0 || row0 + left.rows() > dim_ || col0 + right.cols() > dim_)
    throw StructuralError("LmiBlock(" + label_ + "): term placement out of range");
  if (row0 == col0 && left.rows() != right.cols())
    throw StructuralError("LmiBlock(" + label_ + "): diagonal term must be square");
  terms_.push_back({row0, col0, left, right, unk, transposeUnknown});
}

Eigen::MatrixXd LmiBlock::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd V = constant_;
  for (const auto& term : terms_) {
    Eigen::MatrixXd U = term.unk.unpack(x);
    if (term.transposeUnknown) U.transposeInPlace();
    const Eigen::MatrixXd M = term.left * U * term.right;
    if (term.row0 == term.col0) {
      V.block(term.row0, term.col0, M.rows(), M.cols()) += M + M.transpose();
    } else {
      V.block(term.row0, term.col0, M.rows(), M.cols()) += M;
      V.block(term.col0, term.row0, M.cols(), M.rows()) += M.transpose();
    }
  }
  return V;
}

void LmiBlock::accumulateAdjoint(const Eigen::MatrixXd& Y, Eigen::VectorXd& g) const {
  for (const auto& term : terms_) {
    const Eigen::MatrixXd Yb = Y.block(term.row0, term.col0, term.left.rows(), term.right.cols());
    Eigen::MatrixXd Gmat = 2.0 * term.left.transpose() * Yb * term.right.transpose();
    if (term.transposeUnknown) Gmat.transposeInPlace();
    term.unk.scatterGradient(Gmat, g);
  }
}

std::vector<std::pair<int, std::vector<LmiBlock::Placement>>>
LmiBlock::materializeCoefficients() const {
  // var -> normalized placements (upper triangle: row0 <= col0).
  std::map<int, std::map<std::pair<int, int>, Eigen::MatrixXd>> acc;

  auto addPlacement = [&](int var, int r0, int c0, const Eigen::MatrixXd& M) {
    Eigen::MatrixXd Mn = M;
    int rr = r0, cc = c0;
    if (r0 > c0) {
      Mn = M.transpose();
      std::swap(rr, cc);
    }
    auto key = std::make_pair(rr, cc);
    auto& slot = acc[var];
    auto it = slot.find(key);
    if (it == slot.end())
      slot.emplace(key, Mn);
    else
      it->second += Mn;
  };

  for (const auto& term : terms_) {
    const auto& unk = term.unk;
    auto addBasis = [&](int var, int bi, int bj, double scale) {
      // basis E(bi,bj) of the (possibly transposed) unknown slot
      int i = bi, j = bj;
      if (term.transposeUnknown) std::swap(i, j);
      const Eigen::MatrixXd M = scale * (term.left.col(i) * term.right.row(j));
      if (term.row0 == term.col0) {
        addPlacement(var, term.row0, term.col0, (M + M.transpose()).eval());
      } else {
        addPlacement(var, term.row0, term.col0, M);
      }
    };
    if (unk.symmetric) {
      for (int j = 0; j < unk.cols; ++j) {
        addBasis(unk.varIndex(j, j), j, j, 1.0);
        for (int i = j + 1; i < unk.rows; ++i) {
          const int var = unk.varIndex(i, j);
          addBasis(var, i, j, 1.0);
          addBasis(var, j, i, 1.0);
        }
      }
    } else {
      for (int i = 0; i < unk.rows; ++i)
        for (int j = 0; j < unk.cols; ++j) addBasis(unk.varIndex(i, j), i, j, 1.0);
    }
  }

  std::vector<std::pair<int, std::vector<Placement>>> out;
  out.reserve(acc.size());
  for (auto& [var, slots] : acc) {
    std::vector<Placement> ps;
    ps.reserve(slots.size());
    for (auto& [key, M] : slots) ps.push_back({key.first, key.second, std::move(M)});
    out.emplace_back(var, std::move(ps));
  }
  return out;
}

void AffineLmiSystem::validateStructure() const {
  std::vector<char> used(static_cast<size_t>(numVars()), 0);
  for (const auto& block : blocks) {
    for (const auto& term : block.terms()) {
      if (term.unk.firstVar < 0 || term.unk.firstVar + term.unk.scalarCount() > numVars())
        throw StructuralError("LMI system: term references variables outside the layout");
      for (int v = 0; v < term.unk.scalarCount(); ++v)
        used[static_cast<size_t>(term.unk.firstVar + v)] = 1;
    }
  }
  for (size_t v = 0; v < used.size(); ++v) {
    if (!used[v])
      throw StructuralError("LMI system: decision scalar " + layout.names()[v] +
                            " appears in no block");
  }
}

namespace {

/// Inner product of two coefficient matrices folded to the upper triangle:
/// off-diagonal placements count twice (mirrored half).
double placementInner(const std::vector<LmiBlock::Placement>& a,
                      const std::vector<LmiBlock::Placement>& b) {
  double total = 0.0;
  for (const auto& pa : a)
    for (const auto& pb : b) {
      if (pa.row0 != pb.row0 || pa.col0 != pb.col0) continue;
      if (pa.M.rows() != pb.M.rows() || pa.M.cols() != pb.M.cols())
        throw StructuralError("LMI block: placements at one corner must share their extent");
      const double dot = pa.M.cwiseProduct(pb.M).sum();
      total += (pa.row0 == pa.col0 ? dot : 2.0 * dot);
    }
  return total;
}

Eigen::MatrixXd projectToShiftedCone(const Eigen::MatrixXd& V, double clip) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (V + V.transpose()));
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam(i) = std::min(lam(i), -clip);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FeasibilityResult solveFeasibility(const AffineLmiSystem& sys, const SolveOptions& opts) {
  sys.validateStructure();
  if (opts.adapter) return opts.adapter(sys);

  const int nv = sys.numVars();
  const size_t nb = sys.blocks.size();

  // Gram matrix of the affine map x -> (blocks), assembled once.
  Eigen::SparseMatrix<double> gram(nv, nv);
  {
    std::vector<Eigen::Triplet<double>> trips;
    for (const auto& block : sys.blocks) {
      const auto coeffs = block.materializeCoefficients();
      for (size_t a = 0; a < coeffs.size(); ++a) {
        for (size_t b = a; b < coeffs.size(); ++b) {
          const double val = placementInner(coeffs[a].second, coeffs[b].second);
          if (val == 0.0) continue;
          trips.emplace_back(coeffs[a].first, coeffs[b].first, val);
          if (a != b) trips.emplace_back(coeffs[b].first, coeffs[a].first, val);
        }
      }
    }
    gram.setFromTriplets(trips.begin(), trips.end());
  }
  // Tiny ridge keeps the factorization safe when a variable direction is
  // nearly unobservable in the block values.
  double diagScale = 0.0;
  for (int v = 0; v < nv; ++v) diagScale = std::max(diagScale, gram.coeff(v, v));
  if (diagScale <= 0.0) diagScale = 1.0;
  Eigen::SparseMatrix<double> reg(nv, nv);
  reg.setIdentity();
  gram += (1e-12 * diagScale) * reg;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(gram);
  if (factor.info() != Eigen::Success)
    throw StructuralError("LMI solver: Gram factorization failed");

  const double clip = opts.margin + std::max(10.0 * opts.tol, 1e-12);
  const int chunks = 16;

  // x solving the least-squares projection of z onto the affine set.
  auto affineProject = [&](const std::vector<Eigen::MatrixXd>& z) -> Eigen::VectorXd {
    std::vector<Eigen::VectorXd> partial(chunks, Eigen::VectorXd::Zero(nv));
    parallelFor(static_cast<size_t>(chunks), [&](size_t c) {
      for (size_t b = c; b < nb; b += chunks)
        sys.blocks[b].accumulateAdjoint(z[b] - sys.blocks[b].constant(), partial[c]);
    });
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nv);
    for (const auto& part : partial) rhs += part;
    return factor.solve(rhs);
  };
  auto evaluateAll = [&](const Eigen::VectorXd& x, std::vector<Eigen::MatrixXd>& out) {
    parallelFor(nb, [&](size_t b) { out[b] = sys.blocks[b].evaluate(x); });
  };

  auto finish = [&](FeasibilityResult& result, FeasibilityStatus status,
                    const Eigen::VectorXd& x) {
    result.status = status;
    result.x = x;
    const auto margins = verifyCertificate(sys, x);
    result.achievedMargin =
        margins.empty() ? 0.0 : *std::min_element(margins.begin(), margins.end());
    return result;
  };

  FeasibilityResult result;
  std::vector<double> distHistory;

  if (opts.algorithm == ProjectionAlgorithm::AlternatingProjections) {
    Eigen::VectorXd x =
        opts.warmStart.size() == nv ? opts.warmStart : Eigen::VectorXd::Zero(nv);
    std::vector<Eigen::MatrixXd> V(nb), S(nb);
    for (int iter = 0; iter < opts.maxIter; ++iter) {
      parallelFor(nb, [&](size_t b) {
        V[b] = sys.blocks[b].evaluate(x);
        S[b] = projectToShiftedCone(V[b], clip);
      });
      double dist2 = 0.0;
      for (size_t b = 0; b < nb; ++b) dist2 += (V[b] - S[b]).squaredNorm();
      const double dist = std::sqrt(dist2);

      result.iterations = iter + 1;
      result.distance = dist;
      if (opts.recordDistanceTrace) result.distanceTrace.push_back(dist);
      if (dist < opts.tol) return finish(result, FeasibilityStatus::Feasible, x);

      distHistory.push_back(dist);
      const int w = opts.stagnationWindow;
      if (static_cast<int>(distHistory.size()) > w) {
        const double before = distHistory[distHistory.size() - 1 - static_cast<size_t>(w)];
        if (before - dist < opts.stagnationRelImprovement * before)
          return finish(result, FeasibilityStatus::InfeasibleAtTolerance, x);
      }
      x = affineProject(S);
    }
    return finish(result, FeasibilityStatus::IterationLimit, x);
  }

  // Douglas-Rachford reflections: z <- z + P_cone(2 P_affine(z) - z) - P_affine(z).
  std::vector<Eigen::MatrixXd> z(nb), a(nb), refl(nb), b(nb), coneOfA(nb);
  {
    const Eigen::VectorXd x0 =
        opts.warmStart.size() == nv ? opts.warmStart : Eigen::VectorXd::Zero(nv);
    evaluateAll(x0, z);
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nv);
  const int checkInterval = 10;
  for (int iter = 0; iter < opts.maxIter; ++iter) {
    x = affineProject(z);
    evaluateAll(x, a);
    parallelFor(nb, [&](size_t i) {
      refl[i] = 2.0 * a[i] - z[i];
      b[i] = projectToShiftedCone(refl[i], clip);
    });
    double res2 = 0.0;
    for (size_t i = 0; i < nb; ++i) res2 += (b[i] - a[i]).squaredNorm();
    const double residual = std::sqrt(res2);

    result.iterations = iter + 1;
    result.distance = residual;
    if (opts.recordDistanceTrace) result.distanceTrace.push_back(residual);

    // The affine iterate is the candidate; test it against the cone
    // periodically and whenever the reflection residual gets small.
    if (residual < opts.tol || iter % checkInterval == 0) {
      double feas2 = 0.0;
      parallelFor(nb, [&](size_t i) { coneOfA[i] = projectToShiftedCone(a[i], clip); });
      for (size_t i = 0; i < nb; ++i) feas2 += (a[i] - coneOfA[i]).squaredNorm();
      const double feasDist = std::sqrt(feas2);
      result.distance = feasDist;
      if (feasDist < opts.tol) return finish(result, FeasibilityStatus::Feasible, x);
    }

    distHistory.push_back(residual);
    const int w = opts.stagnationWindow;
    if (static_cast<int>(distHistory.size()) > w) {
      const double before = distHistory[distHistory.size() - 1 - static_cast<size_t>(w)];
      if (before - residual < opts.stagnationRelImprovement * before)
        return finish(result, FeasibilityStatus::InfeasibleAtTolerance, x);
    }

    parallelFor(nb, [&](size_t i) { z[i] += b[i] - a[i]; });
  }
  return finish(result, FeasibilityStatus::IterationLimit, x);
}

std::vector<double> verifyCertificate(const AffineLmiSystem& sys, const Eigen::VectorXd& x) {
  if (x.size() != sys.numVars())
    throw StructuralError("verifyCertificate: decision vector length mismatch");
  std::vector<double> margins;
  margins.reserve(sys.blocks.size());
  for (const auto& block : sys.blocks) {
    const Eigen::MatrixXd V = block.evaluate(x);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (V + V.transpose()),
                                                      Eigen::EigenvaluesOnly);
    margins.push_back(-es.eigenvalues().maxCoeff());
  }
  return margins;
}

void writeSparseDump(const AffineLmiSystem& sys, std::ostream& out) {
  out << "# affine LMI system: " << sys.blocks.size() << " blocks, " << sys.numVars()
      << " variables\n";
  out << "# block var row col value   (var 0 = constant term; vars 1-based)\n";
  for (size_t b = 0; b < sys.blocks.size(); ++b) {
    const auto& block = sys.blocks[b];
    const Eigen::MatrixXd& F0 = block.constant();
    for (int i = 0; i < F0.rows(); ++i)
      for (int j = 0; j < F0.cols(); ++j)
        if (F0(i, j) != 0.0) out << b << " 0 " << i << " " << j << " " << F0(i, j) << "\n";
    for (const auto& [var, placements] : block.materializeCoefficients()) {
      Eigen::MatrixXd Fv = Eigen::MatrixXd::Zero(block.dim(), block.dim());
      for (const auto& p : placements) {
        Fv.block(p.row0, p.col0, p.M.rows(), p.M.cols()) += p.M;
        if (p.row0 != p.col0)
          Fv.block(p.col0, p.row0, p.M.cols(), p.M.rows()) += p.M.transpose();
      }
      for (int i = 0; i < Fv.rows(); ++i)
        for (int j = 0; j < Fv.cols(); ++j)
          if (Fv(i, j) != 0.0)
            out << b << " " << (var + 1) << " " << i << " " << j << " " << Fv(i, j) << "\n";
    }
  }
}

std::string feasibilityStatusName(FeasibilityStatus s) {
  switch (s) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::InfeasibleAtTolerance: return "infeasible-at-tolerance";
    case FeasibilityStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

}  // namespace iofts
