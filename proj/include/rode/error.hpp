#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rode {

/// Where in the (x, t, N) evaluation space a numerical failure happened.
struct ErrorLocation {
  std::optional<double> x;
  std::optional<double> t;
  std::optional<int> N;
};

/// Base of every error the library raises. `code()` is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }
  const ErrorLocation& location() const noexcept { return location_; }

  Error& at(ErrorLocation loc) {
    location_ = loc;
    return *this;
  }

 private:
  std::string code_;
  ErrorLocation location_;
};

/// Bad parameters or inconsistent configuration, raised at construction time.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

/// Argument outside the domain of an operation (t outside [t0, T], x = 0 where undefined, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

class UnsupportedOperation : public Error {
 public:
  explicit UnsupportedOperation(const std::string& what) : Error("unsupported", what) {}
};

/// A hypothesis a formula needs (psi_1 > 0, nonzero phi_1 integral, ...) does not hold.
class HypothesisError : public Error {
 public:
  explicit HypothesisError(const std::string& what) : Error("hypothesis", what) {}
};

/// Overflow, too many non-finite samples, and similar numerical-quality failures.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error("numerical", what) {}
};

/// Tensor rule would exceed the configured point budget.
class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& what) : Error("cap_exceeded", what) {}
};

/// Copy of `e` with `loc` attached, keeping the derived type.
template <class E>
E located(E e, ErrorLocation loc) {
  e.at(loc);
  return e;
}

namespace detail {

template <class... Args>
std::string concat(const Args&... args) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << args);
  return os.str();
}

}  // namespace detail
}  // namespace rode
