#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wcp {

// Failure categories. The CLI maps each one to its own exit status.
enum class ErrorKind {
  InvalidArgument,
  UnsupportedCombination,
  DegenerateNoise,
  Divergence,
  WrongRegime,
  UndetectableDirection,
  TableMiss,
  UnreadableFile,
  EmptyInput,
  NonNumericInput,
  TooFewObservations,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when an extrapolated limit does not settle; keeps the sequence
// that was examined so callers can inspect it.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> sequence)
      : Error(ErrorKind::Divergence, what), sequence_(std::move(sequence)) {}

  const std::vector<double>& sequence() const noexcept { return sequence_; }

 private:
  std::vector<double> sequence_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace wcp
