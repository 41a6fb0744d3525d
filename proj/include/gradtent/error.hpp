#pragma once

#include <stdexcept>
#include <string>

namespace gradtent {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in polynomial rings with different variable counts.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " (at offset " + std::to_string(position) + ")"), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A problem exceeds the desk-scale size limits (block size, constraint count, grid size).
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// An extracted Gram block had an eigenvalue below the admissible floor.
class CertificateRejected : public Error {
 public:
  using Error::Error;
};

}  // namespace gradtent
