#ifndef FREESPACE_ERRORS_HPP
#define FREESPACE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace freespace {

/// Input outside an operation's domain (bad pixel, degenerate plane parameters).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised by the plane search when no grid cell reaches the inlier threshold.
class NoPlaneFound : public std::runtime_error {
 public:
  explicit NoPlaneFound(const std::string& what) : std::runtime_error(what) {}
};

/// Too few bootstrap pixels to build a color model.
class ModelUnderdetermined : public std::runtime_error {
 public:
  explicit ModelUnderdetermined(const std::string& what)
      : std::runtime_error(what) {}
};

/// Raster or field dimensions disagree.
class DimensionMismatch : public std::invalid_argument {
 public:
  explicit DimensionMismatch(const std::string& what)
      : std::invalid_argument(what) {}
};

/// File missing, unreadable, or malformed.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A type invariant did not hold (non-orthonormal pose, non-finite cost, ...).
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what)
      : std::logic_error(what) {}
};

}  // namespace freespace

#endif  // FREESPACE_ERRORS_HPP
