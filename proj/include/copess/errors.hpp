// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace copess {

/// Input failed a precondition or schema/range validation.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Anchor data could not be fit (too few points, non-positive or
/// inconsistent values).
class CalibrationError : public std::runtime_error {
public:
  explicit CalibrationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A load drove a lattice cell past its operational force range.
/// The densified regime is declared unreliable and is never evaluated.
class DensificationError : public std::runtime_error {
public:
  DensificationError(const std::string& msg, int cell = -1)
      : std::runtime_error(msg), cell_index(cell) {}
  int cell_index; // -1 when not tied to a specific array cell
};

/// Displacement outside the modeled [0, densification] interval.
class OutOfRangeError : public std::runtime_error {
public:
  explicit OutOfRangeError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace copess
