#pragma once

#include <stdexcept>
#include <string>

namespace esep {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed graph or distribution text.
class ParseError : public Error {
 public:
  using Error::Error;
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// A precondition on a query or operation does not hold (unknown vertex,
// latent vertex where an observed one is required, overlapping sets, ...).
class QueryError : public Error {
 public:
  using Error::Error;
};

// Conditioning event has probability at or below the null threshold.
class ZeroConditioningEvent : public Error {
 public:
  using Error::Error;
};

// The feasibility solver could not converge and no fallback applies.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

// An exact joint would exceed the configured size cap.
class SizeCapError : public Error {
 public:
  using Error::Error;
};

// Bound intersection came out empty: the data contradict the model.
class ModelFalsified : public Error {
 public:
  using Error::Error;
};

}  // namespace esep
