#pragma once

#include <stdexcept>
#include <string>

namespace mvr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two points/vectors from different manifolds were combined.
class KindMismatch : public Error {
 public:
  explicit KindMismatch(const std::string& what) : Error(what) {}
};

/// Invalid point or vector coordinates (unit norm, positivity, ...).
class InvalidValue : public Error {
 public:
  explicit InvalidValue(const std::string& what) : Error(what) {}
};

/// log/geodesic requested across a cut locus (antipodal points).
class AntipodalPoint : public Error {
 public:
  explicit AntipodalPoint(const std::string& what) : Error(what) {}
};

/// Jacobi-based map evaluated at or beyond a conjugate point.
class ConjugatePoint : public Error {
 public:
  explicit ConjugatePoint(const std::string& what) : Error(what) {}
};

/// Gradient of dist^p requested where it is singular (y = f, p <= 1).
class SingularGradient : public Error {
 public:
  explicit SingularGradient(const std::string& what) : Error(what) {}
};

/// The mean-differential map L is numerically singular (degenerate mean).
class SingularL : public Error {
 public:
  explicit SingularL(const std::string& what) : Error(what) {}
};

/// An iterative scheme exhausted its budget without reaching tolerance.
class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& what) : Error(what) {}
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

}  // namespace mvr
