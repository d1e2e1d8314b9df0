#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resokit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition (sizes, ordering, ranges).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input points do not determine a circle (collinear or coincident).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// The Jacobian of a least-squares problem is rank deficient at the start point.
class SingularJacobianError : public Error {
 public:
  SingularJacobianError(std::size_t rank, std::size_t params)
      : Error("singular Jacobian: rank " + std::to_string(rank) + " < " +
              std::to_string(params) + " parameters"),
        rank_(rank) {}
  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

/// A trace without a detectable resonance dip.
class NoResonanceError : public Error {
 public:
  using Error::Error;
};

/// Fitted quality factors imply negative internal loss (over-coupled mis-fit).
class UnphysicalError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based and always >= 1.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line < 1 ? 1 : line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace resokit
