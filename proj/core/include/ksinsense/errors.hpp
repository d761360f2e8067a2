#pragma once

#include <stdexcept>
#include <string>

namespace ksi {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A pivot fell below the singularity threshold during banded LU.
class SingularMatrix : public Error {
public:
    explicit SingularMatrix(const std::string& what) : Error(what) {}
};

/// An interval (a,b) violates 0 < a < b < 1.
class BadInterval : public Error {
public:
    explicit BadInterval(const std::string& what) : Error(what) {}
};

/// Carleman parameters violate k > m (weight positivity would break).
class DegenerateParams : public Error {
public:
    explicit DegenerateParams(const std::string& what) : Error(what) {}
};

/// Parameter search exhausted its grid without finding an admissible value.
class SearchFailed : public Error {
public:
    explicit SearchFailed(const std::string& what) : Error(what) {}
};

/// The observation side of a Carleman ratio is numerically zero.
class DegenerateObservation : public Error {
public:
    explicit DegenerateObservation(const std::string& what) : Error(what) {}
};

/// Power iteration failed to converge.
class EigFailed : public Error {
public:
    explicit EigFailed(const std::string& what) : Error(what) {}
};

/// Configuration file violates a documented constraint.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace ksi
