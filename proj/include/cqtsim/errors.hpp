#pragma once

#include <stdexcept>
#include <string>

namespace cqt {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched shapes, unknown labels, entangled factors where a product was required.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// An operation applied outside its contract (wrong atom basis, non-unitary matrix).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Probability mass escaped past the Fock cutoff.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& msg, double mass) : Error(msg), reported_mass(mass) {}
  double reported_mass;
};

/// Conditioning on a branch whose probability is numerically zero.
class PostselectError : public Error {
 public:
  PostselectError(const std::string& msg, double prob) : Error(msg), branch_probability(prob) {}
  double branch_probability;
};

/// Degenerate norms and other floating-point breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Script parse failure; carries the 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : Error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

/// Script execution failure; carries the 1-based line of the offending statement.
class ScriptRuntimeError : public Error {
 public:
  ScriptRuntimeError(const std::string& msg, int line)
      : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
  int line;
};

}  // namespace cqt
