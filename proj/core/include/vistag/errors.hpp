#pragma once

#include <stdexcept>
#include <string>

namespace vistag {

/// Shape or extent mismatch between tensors.
class DimensionError : public std::runtime_error {
public:
  explicit DimensionError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration value (stride, pad, resolution, flag combination).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite value where a finite one is required.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller broke an API contract (stale trace, inconsistent arguments).
class ContractError : public std::runtime_error {
public:
  explicit ContractError(const std::string& what) : std::runtime_error(what) {}
};

/// Annotation refers to an absent instance or an out-of-range label.
class LabelError : public std::runtime_error {
public:
  explicit LabelError(const std::string& what) : std::runtime_error(what) {}
};

/// File system or format failure.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace vistag
