#ifndef EHRELAY_ERRORS_HPP
#define EHRELAY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ehrelay {

/// Invalid scenario values (non-positive lambdas, rho outside [0, 1], ...).
class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(const std::string& what) : std::invalid_argument(what) {}
};

/// A closed form was asked for at rho = 0 or rho = 1.
class DegenerateRhoError : public std::domain_error {
 public:
  explicit DegenerateRhoError(const std::string& what) : std::domain_error(what) {}
};

/// A formula left its validity regime (e.g. the optimal rho fell outside
/// (0, 1), or the approximate p3 left [0, 1] by more than the slack).
class RegimeError : public std::out_of_range {
 public:
  explicit RegimeError(const std::string& what) : std::out_of_range(what) {}
};

/// Malformed scenario or preset file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Output file could not be written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ehrelay

#endif  // EHRELAY_ERRORS_HPP
