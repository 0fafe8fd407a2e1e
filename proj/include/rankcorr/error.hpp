#pragma once

#include <stdexcept>
#include <string>

namespace rankcorr {

/// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  InvalidInput,   // malformed data, violated preconditions
  Ties,           // tied observations inside a column
  ResourceGuard,  // enumeration or dimension guard exceeded
  Numerical       // solver or quadrature failed to converge
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

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidInput, what);
}

}  // namespace rankcorr
