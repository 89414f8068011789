#pragma once

#include <stdexcept>
#include <string>

namespace drx {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A required column is missing or the header cannot be interpreted.
class SchemaError : public Error {
public:
  using Error::Error;
};

// A single data row failed to parse or violated a field invariant.
// Carries the 1-based line number of the offending row.
class RowError : public Error {
public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

// Grid alignment failed (duplicate timestamps, off-grid stamps, empty span).
class AlignmentError : public Error {
public:
  using Error::Error;
};

// Input too short, constant, or otherwise unusable for the statistic.
class DegenerateInputError : public Error {
public:
  using Error::Error;
};

// Not enough usable observations after masking/conditioning.
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

// Argument outside its mathematical domain.
class DomainError : public Error {
public:
  using Error::Error;
};

// Regression design matrix is rank deficient.
class SingularDesignError : public Error {
public:
  using Error::Error;
};

// Toeplitz / recursion system too ill-conditioned to continue.
class ConditioningError : public Error {
public:
  using Error::Error;
};

// A value hit the domain boundary of the configured input transform
// (e.g. log of a nonpositive price).
class TransformDomainError : public Error {
public:
  using Error::Error;
};

// Demand and supply curves do not intersect at positive price/quantity.
class NoEquilibriumError : public Error {
public:
  using Error::Error;
};

// Post-shift supply cannot serve the inherited (vertical) demand.
class ScarcityError : public Error {
public:
  using Error::Error;
};

// Malformed configuration or spec document.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Pipeline stage failure wrapper: remembers which stage died.
class StageError : public Error {
public:
  StageError(const std::string& stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

}  // namespace drx
