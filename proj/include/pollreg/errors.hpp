#pragma once

#include <stdexcept>
#include <string>

// Error types thrown on contract violations. Validation routines report
// structured violation lists instead; these exceptions are for calls that
// cannot return a meaningful value.

namespace pollreg {

struct ReducibleChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Service rate does not dominate the server-station arrival rate; the
// epoch would never drain.
struct UnstableEpochError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewSamplesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyServerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TiltOutOfRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoAdmissibleTiltError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pollreg
