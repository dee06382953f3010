#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rana {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
  using Error::Error;
};
class BoundsError : public Error {
  using Error::Error;
};
class CapacityError : public Error {
  using Error::Error;
};
class ParameterError : public Error {
  using Error::Error;
};
class ConsistencyError : public Error {
  using Error::Error;
};
class EstimationError : public Error {
  using Error::Error;
};
class LookupError : public Error {
  using Error::Error;
};
class ContractError : public Error {
  using Error::Error;
};
class MetricError : public Error {
  using Error::Error;
};
class ConfigError : public Error {
  using Error::Error;
};

/// Oracle budget ran out. Raised by `Oracle::query` for a new pair when no
/// budget remains.
class BudgetExhausted : public Error {
  using Error::Error;
};

}  // namespace rana
