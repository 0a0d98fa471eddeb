#pragma once

#include <stdexcept>
#include <string>

namespace hessmooth {

/// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidInput,    // malformed files, bad parameters, precondition violations
  RankDeficient,   // reduced system singular (null space left unconstrained)
  SolverFailure,   // breakdown or non-convergence
  Io,              // file system failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidInput, what);
}

}  // namespace hessmooth
