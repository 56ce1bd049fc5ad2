#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ot2d {

/// Asked for the face of a zero displacement; the gauge direction is undefined.
class ZeroDisplacementError : public std::invalid_argument {
 public:
  ZeroDisplacementError() : std::invalid_argument("face_of_direction: zero displacement") {}
};

/// A point expected inside a convex body is outside it beyond tolerance.
class PointNotInBodyError : public std::invalid_argument {
 public:
  explicit PointNotInBodyError(const std::string& what) : std::invalid_argument(what) {}
};

/// Marginal masses of a block or plan do not balance beyond tolerance.
class MassImbalanceError : public std::runtime_error {
 public:
  explicit MassImbalanceError(const std::string& what) : std::runtime_error(what) {}
};

/// Instance exceeds the size bounds of an enumeration oracle.
class TooLargeError : public std::invalid_argument {
 public:
  explicit TooLargeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation invoked on a cost family it does not apply to.
class NotApplicableError : public std::logic_error {
 public:
  explicit NotApplicableError(const std::string& what) : std::logic_error(what) {}
};

/// Certificate that no feasible plan exists: a set of sources whose admissible
/// targets cannot absorb their mass (a violated Hall condition).
struct InfeasibilityWitness {
  std::vector<int> sources;      // cut side of the source atoms
  std::vector<int> targets;      // all targets admissible from those sources
  double source_mass = 0.0;
  double target_mass = 0.0;
};

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
  InfeasibleError(const std::string& what, InfeasibilityWitness w)
      : std::runtime_error(what), witness(std::move(w)), has_witness(true) {}

  InfeasibilityWitness witness;
  bool has_witness = false;
};

}  // namespace ot2d
