#pragma once

#include <stdexcept>
#include <string>

namespace iofts {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Query time outside the represented domain beyond the clamping tolerance.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A weighting matrix is singular where an inverse is required.
class SingularWeightError : public Error {
 public:
  using Error::Error;
};

/// Integration produced non-finite values; message names the first bad node.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The worst-case direction is undefined (zero reachable output).
class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

/// Malformed problem data: dimension mismatch, missing field, bad layout.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Scalar parameter outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Resetting-time windows violate the disjointness requirement.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// A simulated reset realization falls outside its admissible window.
class RealizationError : public Error {
 public:
  using Error::Error;
};

/// Controller coupling condition fails at a node.
class CouplingError : public Error {
 public:
  using Error::Error;
};

/// Controller reconstruction hit a singular transformation.
class ReconstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace iofts
