#pragma once

#include <stdexcept>
#include <string>

namespace fofr {

enum class ErrorKind {
  InvalidArgument,
  IncompatibleGrid,
  TruncationTooLarge,
  DegenerateInput,
  ParseError,
  NumericalFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

/// Non-fatal diagnostics (degenerate configurations, near-tied spectra).
/// Written to stderr with a "fofr: warning:" prefix.
void warn(const std::string& msg);

}  // namespace fofr
