#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qgan {

/// Precondition violated by the caller (bad angle, shape, index, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A least-squares or decomposition fit could not produce a usable model.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary input. `offset()` is the byte position where parsing
/// stopped.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A mapping could not be inverted at the given point.
class InversionFailure : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A training loop produced a non-finite loss or metric and stopped.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace qgan
