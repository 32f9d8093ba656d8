#ifndef TONECRAFT_ERROR_HPP
#define TONECRAFT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tonecraft {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw message archive violates its own invariants (duplicate ids, self
// replies, reply cycles, unparseable lines).
class ArchiveError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Design matrix column that is linearly dependent on the columns before it.
// Column 0 is the intercept.
class RankDeficientError : public Error {
 public:
  RankDeficientError(std::size_t column, const std::string& name)
      : Error("design matrix is rank deficient: column " + std::to_string(column) + " ('" + name +
              "') is linearly dependent on earlier columns"),
        column_(column) {}

  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

// Non-finite value appeared during a numeric computation.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

// Training pair rejected before training; index is its position in the input.
class InvalidPairError : public Error {
 public:
  InvalidPairError(std::size_t index, const std::string& reason)
      : Error("training pair " + std::to_string(index) + ": " + reason), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace tonecraft

#endif  // TONECRAFT_ERROR_HPP
