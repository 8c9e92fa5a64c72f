#pragma once

#include <stdexcept>
#include <string>

namespace hstn {

// Shape or sector incompatibility between tensors/indices.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user-facing configuration (model, parameters, observable ids, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested symmetry sector admits no states for the given chain.
struct SectorError : std::runtime_error {
  explicit SectorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically degenerate input (e.g. all singular values zero).
struct DegenerateInputError : std::runtime_error {
  explicit DegenerateInputError(const std::string& msg) : std::runtime_error(msg) {}
};

// An oracle was asked for more than its configured capacity.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// A TEBD trajectory stopped approximating unitary dynamics.
struct TrajectoryError : std::runtime_error {
  TrajectoryError(const std::string& msg, int step, long seed)
      : std::runtime_error(msg), step(step), seed(seed) {}
  int step;
  long seed;
};

// Thermal average requested where masked points carry real Boltzmann weight.
struct MaskedWeightError : std::runtime_error {
  explicit MaskedWeightError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hstn
